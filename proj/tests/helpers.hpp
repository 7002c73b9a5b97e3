#pragma once

#include "aad/matrix.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace aad::test {

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("aad_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline MatrixF32 random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    MatrixF32 m(rows, cols);
    for (auto& v : m.data()) v = static_cast<float>(g(rng));
    return m;
}

inline TimeSeries random_series(std::size_t rows, std::size_t cols, double rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return TimeSeries(random_matrix(rows, cols, rng), rate);
}

inline TimeSeries tone(double hz, double rate, std::size_t n, double amplitude = 1.0, double phase = 0.0) {
    MatrixF32 m(n, 1);
    for (std::size_t t = 0; t < n; ++t)
        m(t, 0) = static_cast<float>(amplitude * std::sin(2.0 * M_PI * hz * static_cast<double>(t) / rate + phase));
    return TimeSeries(std::move(m), rate);
}

inline double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace aad::test
