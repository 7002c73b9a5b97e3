#include "aad/matrix.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace aad {

static_assert(std::endian::native == std::endian::little,
              "matrix interchange code assumes a little-endian host");

MatrixF32::MatrixF32(std::size_t rows, std::size_t cols, float fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

MatrixF32::MatrixF32(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        std::ostringstream os;
        os << "matrix data length " << data_.size() << " != " << rows << "x" << cols;
        throw ValidationError(os.str());
    }
}

std::vector<double> MatrixF32::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
}

void MatrixF32::set_column(std::size_t c, std::span<const double> values) {
    for (std::size_t r = 0; r < rows_; ++r) data_[r * cols_ + c] = static_cast<float>(values[r]);
}

MatrixF32 MatrixF32::slice_rows(std::size_t begin, std::size_t end) const {
    end = std::min(end, rows_);
    if (begin > end) begin = end;
    std::vector<float> d(data_.begin() + begin * cols_, data_.begin() + end * cols_);
    return MatrixF32(end - begin, cols_, std::move(d));
}

MatrixF32 MatrixF32::slice_cols(std::size_t begin, std::size_t end) const {
    end = std::min(end, cols_);
    MatrixF32 out(rows_, end - begin);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = (*this)(r, c);
    return out;
}

bool MatrixF32::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

TimeSeries::TimeSeries(MatrixF32 m, double rate) : matrix(std::move(m)), sample_rate_hz(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw ValidationError("sample rate must be positive, got " + std::to_string(rate));
}

MatrixF32 hconcat(std::span<const MatrixF32> parts) {
    if (parts.empty()) return {};
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ValidationError("hconcat: row count mismatch");
        cols += p.cols();
    }
    MatrixF32 out(rows, cols);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(p.row(r).begin(), p.row(r).end(), out.row(r).begin() + offset);
        offset += p.cols();
    }
    return out;
}

namespace {

template <typename T>
void put_le(std::array<char, kMatrixHeaderBytes>& buf, std::size_t at, T value) {
    std::memcpy(buf.data() + at, &value, sizeof(T));
}

template <typename T>
T get_le(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

std::size_t write_matrix(const MatrixF32& m, std::ostream& sink) {
    std::array<char, kMatrixHeaderBytes> header{};
    std::memcpy(header.data(), "AADM", 4);
    put_le<std::uint32_t>(header, 4, kMatrixFormatVersion);
    put_le<std::uint64_t>(header, 8, m.rows());
    put_le<std::uint64_t>(header, 16, m.cols());

    sink.write(header.data(), header.size());
    if (!sink) throw IoError("matrix write failed in header", 0);

    const auto payload = m.data();
    const std::size_t payload_bytes = payload.size() * sizeof(float);
    // Chunked so that a failure can be located.
    constexpr std::size_t kChunk = 1 << 20;
    std::size_t written = 0;
    const char* bytes = reinterpret_cast<const char*>(payload.data());
    while (written < payload_bytes) {
        const std::size_t n = std::min(kChunk, payload_bytes - written);
        sink.write(bytes + written, static_cast<std::streamsize>(n));
        if (!sink) throw IoError("matrix write failed", kMatrixHeaderBytes + written);
        written += n;
    }
    return kMatrixHeaderBytes + payload_bytes;
}

MatrixF32 read_matrix(std::istream& source, ReadOptions opts) {
    std::array<char, kMatrixHeaderBytes> header{};
    source.read(header.data(), header.size());
    const auto got = static_cast<std::size_t>(source.gcount());
    if (got >= 4 && std::memcmp(header.data(), "AADM", 4) != 0)
        throw FormatError("bad magic: expected \"AADM\"");
    if (got < kMatrixHeaderBytes)
        throw CorruptionError("truncated header: expected " + std::to_string(kMatrixHeaderBytes) +
                                  " bytes, got " + std::to_string(got),
                              kMatrixHeaderBytes, got);

    const auto version = get_le<std::uint32_t>(header.data() + 4);
    if (version != kMatrixFormatVersion)
        throw FormatError("unsupported matrix format version " + std::to_string(version));
    const auto rows = get_le<std::uint64_t>(header.data() + 8);
    const auto cols = get_le<std::uint64_t>(header.data() + 16);

    constexpr auto kMaxElems = std::numeric_limits<std::size_t>::max() / sizeof(float);
    if (cols != 0 && rows > kMaxElems / cols)
        throw CorruptionError("header dimensions overflow", std::numeric_limits<std::size_t>::max(), 0);
    const std::size_t count = static_cast<std::size_t>(rows * cols);
    const std::size_t expected = count * sizeof(float);

    // Grow in chunks so a lying header cannot force a huge allocation.
    std::vector<float> data;
    constexpr std::size_t kChunkElems = 1 << 18;
    std::size_t have = 0;
    while (have < count) {
        const std::size_t n = std::min(kChunkElems, count - have);
        data.resize(have + n);
        source.read(reinterpret_cast<char*>(data.data() + have), static_cast<std::streamsize>(n * sizeof(float)));
        const auto read_bytes = static_cast<std::size_t>(source.gcount());
        if (read_bytes != n * sizeof(float)) {
            const std::size_t actual = have * sizeof(float) + read_bytes;
            throw CorruptionError("truncated payload: expected " + std::to_string(expected) +
                                      " bytes, got " + std::to_string(actual),
                                  expected, actual);
        }
        have += n;
    }

    MatrixF32 m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
    for (float v : m.data()) {
        if (std::isnan(v) && opts.allow_nan) continue;
        if (!std::isfinite(v)) throw ValidationError("matrix contains non-finite values");
    }
    return m;
}

std::size_t write_matrix_file(const MatrixF32& m, const std::filesystem::path& path) {
    return atomic_write(path, [&](std::ostream& os) { return write_matrix(m, os); });
}

MatrixF32 read_matrix_file(const std::filesystem::path& path, ReadOptions opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResolutionError("cannot open matrix file " + path.string(), path.string());
    try {
        MatrixF32 m = read_matrix(in, opts);
        if (in.peek() != std::char_traits<char>::eof()) {
            const auto size = std::filesystem::file_size(path);
            const std::size_t expected = kMatrixHeaderBytes + m.size() * sizeof(float);
            throw CorruptionError("trailing bytes after payload: expected " + std::to_string(expected) +
                                      " bytes, file has " + std::to_string(size),
                                  expected, size);
        }
        return m;
    } catch (const CorruptionError& e) {
        throw CorruptionError(path.string() + ": " + e.what(), e.expected_bytes, e.actual_bytes);
    }
}

}  // namespace aad

namespace aad {

MatrixShape read_matrix_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResolutionError("cannot open matrix file " + path.string(), path.string());
    std::array<char, kMatrixHeaderBytes> header{};
    in.read(header.data(), header.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got < kMatrixHeaderBytes)
        throw CorruptionError(path.string() + ": truncated header", kMatrixHeaderBytes, got);
    if (std::memcmp(header.data(), "AADM", 4) != 0) throw FormatError(path.string() + ": bad magic");
    if (get_le<std::uint32_t>(header.data() + 4) != kMatrixFormatVersion)
        throw FormatError(path.string() + ": unsupported version");
    return {static_cast<std::size_t>(get_le<std::uint64_t>(header.data() + 8)),
            static_cast<std::size_t>(get_le<std::uint64_t>(header.data() + 16))};
}

}  // namespace aad

namespace aad {

std::vector<double> to_column_major(const MatrixF32& m) {
    std::vector<double> out(m.size());
    const std::size_t R = m.rows(), C = m.cols();
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) out[c * R + r] = m(r, c);
    return out;
}

MatrixF32 from_column_major(std::span<const double> cols, std::size_t rows, std::size_t n_cols) {
    MatrixF32 out(rows, n_cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < n_cols; ++c) out(r, c) = static_cast<float>(cols[c * rows + r]);
    return out;
}

}  // namespace aad
