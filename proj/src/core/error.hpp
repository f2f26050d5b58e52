#ifndef PULEARN_CORE_ERROR_HPP
#define PULEARN_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pulearn {

// Mirrors the status codes exposed through the C API.
enum class ErrorCode {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    Degenerate = 4,
    Version = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        fail(ErrorCode::InvalidArgument, message);
    }
}

}  // namespace pulearn

#endif
