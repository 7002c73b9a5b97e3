#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace aad {

/// Runs `writer` against a sibling temp file, then renames it over `path`.
template <typename Writer>
auto atomic_write(const std::filesystem::path& path, Writer&& writer);

void atomic_write_text(const std::filesystem::path& path, std::string_view text);

/// Flat `key=value` metadata files (one pair per line, '#' comments).
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
const std::string& require_key(const KeyValues& kv, const std::string& key, const std::filesystem::path& origin);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

/// Deterministic 64-bit mix for deriving per-stream RNG seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_string(std::string_view s);

/// Round-trippable shortest decimal text for a double.
std::string format_double(double v);

}  // namespace aad

#include <fstream>
#include <random>

#include "aad/error.hpp"

namespace aad {

template <typename Writer>
auto atomic_write(const std::filesystem::path& path, Writer&& writer) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    thread_local std::mt19937_64 rng{std::random_device{}()};
    const fs::path tmp = path.string() + ".tmp" + std::to_string(rng() % 1000000007ULL);
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing", 0);
    try {
        auto result = writer(static_cast<std::ostream&>(os));
        os.close();
        if (!os) throw IoError("failed to flush " + tmp.string(), 0);
        fs::rename(tmp, path);
        return result;
    } catch (...) {
        os.close();
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

}  // namespace aad
