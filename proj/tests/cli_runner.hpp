#ifndef PULEARN_TESTS_CLI_RUNNER_HPP
#define PULEARN_TESTS_CLI_RUNNER_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace clirun {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Runs the CLI with `args` (already shell-quoted) and captures both streams.
class Runner {
public:
    explicit Runner(std::string binary) : binary_(std::move(binary)) {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("pulearn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~Runner() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    Runner(const Runner&) = delete;
    Runner& operator=(const Runner&) = delete;

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Result run(const std::string& args) const {
        const auto out = dir_ / ".stdout";
        const auto err = dir_ / ".stderr";
        const std::string cmd = "'" + binary_ + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

private:
    std::string binary_;
    std::filesystem::path dir_;
};

}  // namespace clirun

#endif
