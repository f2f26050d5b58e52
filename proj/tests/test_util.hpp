#ifndef PULEARN_TESTS_TEST_UTIL_HPP
#define PULEARN_TESTS_TEST_UTIL_HPP

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "data.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pulearn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline pulearn::FeaturesPtr features(std::size_t n, std::size_t d, std::vector<double> values) {
    return std::make_shared<const pulearn::FeatureMatrix>(n, d, std::move(values));
}

inline pulearn::PUDataset pu_from(std::size_t n, std::size_t d, std::vector<double> values,
                                  std::vector<std::uint8_t> observed) {
    return pulearn::PUDataset(features(n, d, std::move(values)), std::move(observed));
}

inline pulearn::PNDataset pn_from(std::size_t n, std::size_t d, std::vector<double> values, std::vector<int> labels) {
    return pulearn::PNDataset(features(n, d, std::move(values)), std::move(labels));
}

}  // namespace testutil

#endif
