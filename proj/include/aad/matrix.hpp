#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace aad {

/// Dense row-major float32 matrix. Rows are time samples wherever a matrix
/// carries a signal.
class MatrixF32 {
public:
    MatrixF32() = default;
    MatrixF32(std::size_t rows, std::size_t cols, float fill = 0.0f);
    MatrixF32(std::size_t rows, std::size_t cols, std::vector<float> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    float operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> values);

    /// Rows [begin, end) as a new matrix.
    MatrixF32 slice_rows(std::size_t begin, std::size_t end) const;
    /// Columns [begin, end) as a new matrix.
    MatrixF32 slice_cols(std::size_t begin, std::size_t end) const;

    bool all_finite() const noexcept;

    friend bool operator==(const MatrixF32&, const MatrixF32&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

/// Time x channels signal with its sampling rate.
struct TimeSeries {
    MatrixF32 matrix;
    double sample_rate_hz = 0.0;

    TimeSeries() = default;
    TimeSeries(MatrixF32 m, double rate);

    std::size_t samples() const noexcept { return matrix.rows(); }
    std::size_t channels() const noexcept { return matrix.cols(); }
    double duration_seconds() const noexcept { return matrix.rows() / sample_rate_hz; }
};

/// Column-major double copy (channel c at [c*rows, (c+1)*rows)), the layout
/// the numeric kernels consume.
std::vector<double> to_column_major(const MatrixF32& m);
MatrixF32 from_column_major(std::span<const double> cols, std::size_t rows, std::size_t n_cols);

/// Column-wise concatenation; all inputs must share rows.
MatrixF32 hconcat(std::span<const MatrixF32> parts);

// ---- interchange format ----------------------------------------------------
//
// "AADM" | u32 version=1 | u64 rows | u64 cols | rows*cols f32, all little-endian.

inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 24;

struct ReadOptions {
    bool allow_nan = false;
};

std::size_t write_matrix(const MatrixF32& m, std::ostream& sink);
MatrixF32 read_matrix(std::istream& source, ReadOptions opts = {});

/// Writes through a temp file followed by a rename so readers never observe
/// a partial file.
std::size_t write_matrix_file(const MatrixF32& m, const std::filesystem::path& path);
MatrixF32 read_matrix_file(const std::filesystem::path& path, ReadOptions opts = {});

struct MatrixShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
};
/// Validates magic/version and returns the stored dimensions without reading the payload.
MatrixShape read_matrix_header(const std::filesystem::path& path);

}  // namespace aad
