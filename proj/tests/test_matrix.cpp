#include "aad/error.hpp"
#include "aad/matrix.hpp"
#include "aad/util.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

using namespace aad;

namespace {

std::string encode(const MatrixF32& m) {
    std::ostringstream os;
    write_matrix(m, os);
    return os.str();
}

MatrixF32 decode(const std::string& bytes, ReadOptions opts = {}) {
    std::istringstream is(bytes);
    return read_matrix(is, opts);
}

}  // namespace

TEST_SUITE("matrix") {

TEST_CASE("header layout is magic, version, rows, cols, little-endian") {
    MatrixF32 m(2, 3);
    for (std::size_t i = 0; i < 6; ++i) m.data()[i] = static_cast<float>(i) + 0.5f;
    const std::string b = encode(m);
    REQUIRE(b.size() == kMatrixHeaderBytes + 6 * 4);
    CHECK(b.substr(0, 4) == "AADM");
    std::uint32_t version = 0;
    std::uint64_t rows = 0, cols = 0;
    std::memcpy(&version, b.data() + 4, 4);
    std::memcpy(&rows, b.data() + 8, 8);
    std::memcpy(&cols, b.data() + 16, 8);
    CHECK(version == 1);
    CHECK(rows == 2);
    CHECK(cols == 3);
    float first = 0;
    std::memcpy(&first, b.data() + 24, 4);
    CHECK(first == 0.5f);
}

TEST_CASE("round trip preserves bits, including empty shapes") {
    std::mt19937_64 rng(3);
    for (auto [r, c] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 5}, {7, 0}, {1, 1}, {33, 17}}) {
        const MatrixF32 m = test::random_matrix(r, c, rng);
        const MatrixF32 back = decode(encode(m));
        CHECK(back.rows() == r);
        CHECK(back.cols() == c);
        CHECK(std::memcmp(back.data().data(), m.data().data(), m.size() * 4) == 0);
    }
}

TEST_CASE("bad magic is a format error") {
    std::string b = encode(MatrixF32(2, 2, 1.0f));
    b[0] = 'X';
    CHECK_THROWS_AS(decode(b), FormatError);
}

TEST_CASE("unknown version is a format error") {
    std::string b = encode(MatrixF32(2, 2, 1.0f));
    b[4] = 2;
    CHECK_THROWS_AS(decode(b), FormatError);
}

TEST_CASE("truncated payload reports expected and actual byte counts") {
    std::string b = encode(MatrixF32(4, 4, 1.0f));
    b.resize(b.size() - 10);
    try {
        decode(b);
        FAIL("no exception");
    } catch (const CorruptionError& e) {
        CHECK(e.expected_bytes == 64);
        CHECK(e.actual_bytes == 54);
    }
}

TEST_CASE("truncated header is corruption") {
    CHECK_THROWS_AS(decode(std::string("AADM\x01\x00", 6)), CorruptionError);
}

TEST_CASE("NaN payload is rejected unless allowed") {
    MatrixF32 m(1, 2, 0.0f);
    m(0, 1) = std::nanf("");
    const auto b = encode(m);
    CHECK_THROWS_AS(decode(b), ValidationError);
    CHECK(std::isnan(decode(b, {true})(0, 1)));
}

TEST_CASE("file helpers: atomic write, header peek, trailing bytes") {
    test::TempDir dir("matrix");
    std::mt19937_64 rng(5);
    const MatrixF32 m = test::random_matrix(10, 3, rng);
    const auto p = dir / "m.aadm";
    CHECK(write_matrix_file(m, p) == kMatrixHeaderBytes + 120);
    CHECK(read_matrix_file(p) == m);
    const auto shape = read_matrix_header(p);
    CHECK(shape.rows == 10);
    CHECK(shape.cols == 3);
    for (const auto& e : std::filesystem::directory_iterator(dir.path()))
        CHECK(e.path().filename().string().find(".tmp") == std::string::npos);

    {
        std::ofstream os(p, std::ios::app | std::ios::binary);
        os << "xx";
    }
    CHECK_THROWS_AS(read_matrix_file(p), CorruptionError);
    CHECK_THROWS_AS(read_matrix_file(dir / "missing.aadm"), ResolutionError);
}

TEST_CASE("column-major conversion and slicing") {
    MatrixF32 m(3, 2);
    for (std::size_t i = 0; i < 6; ++i) m.data()[i] = static_cast<float>(i);
    const auto cm = to_column_major(m);
    CHECK(cm == std::vector<double>{0, 2, 4, 1, 3, 5});
    CHECK(from_column_major(cm, 3, 2) == m);
    CHECK(m.slice_rows(1, 3)(0, 0) == 2.0f);
    CHECK(m.slice_cols(1, 2).column(0) == std::vector<double>{1, 3, 5});
    const MatrixF32 parts[] = {m, m.slice_cols(0, 1)};
    CHECK(hconcat(parts).cols() == 3);
}

TEST_CASE("time series validates its rate") {
    CHECK_THROWS_AS(TimeSeries(MatrixF32(2, 2), 0.0), ValidationError);
    CHECK(TimeSeries(MatrixF32(128, 1), 64.0).duration_seconds() == doctest::Approx(2.0));
}

TEST_CASE("key-value metadata round trip") {
    test::TempDir dir("kv");
    write_key_values(dir / "a.meta", {{"model_id", "tera"}, {"stride_ms", "10"}});
    const auto kv = read_key_values(dir / "a.meta");
    CHECK(kv.at("model_id") == "tera");
    CHECK(require_key(kv, "stride_ms", dir / "a.meta") == "10");
    CHECK_THROWS_AS(require_key(kv, "layer_count", dir / "a.meta"), ValidationError);
}

}  // TEST_SUITE
