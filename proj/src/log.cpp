#include "aad/log.hpp"
#include "aad/util.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>

namespace aad {

// ---- util ------------------------------------------------------------------

void atomic_write_text(const std::filesystem::path& path, std::string_view text) {
    atomic_write(path, [&](std::ostream& os) {
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        return text.size();
    });
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ResolutionError("cannot open metadata file " + path.string(), path.string());
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ValidationError(path.string() + ": malformed line '" + t + "'");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
    atomic_write_text(path, os.str());
}

const std::string& require_key(const KeyValues& kv, const std::string& key, const std::filesystem::path& origin) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(origin.string() + ": missing key '" + key + "'");
    return it->second;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined word
    std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---- log -------------------------------------------------------------------

namespace {
std::mutex g_log_mutex;
std::ofstream g_log_file;
Logger::Level g_level = Logger::Level::info;
std::vector<std::string> g_warnings;
}  // namespace

Record::~Record() {
    if (level_ < g_level) return;
    static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
    std::ostringstream os;
    os << "level=" << kNames[static_cast<int>(level_)] << " event=" << event_ << fields_.str();
    const std::string line = os.str();
    std::lock_guard lock(g_log_mutex);
    std::cerr << line << '\n';
    if (g_log_file.is_open()) g_log_file << line << '\n' << std::flush;
    if (level_ == Logger::Level::warn) g_warnings.push_back(line);
}

void Logger::open_file(const std::filesystem::path& path) {
    std::lock_guard lock(g_log_mutex);
    if (g_log_file.is_open()) g_log_file.close();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    g_log_file.open(path, std::ios::app);
}

void Logger::close_file() {
    std::lock_guard lock(g_log_mutex);
    if (g_log_file.is_open()) g_log_file.close();
}

void Logger::set_level(Level level) { g_level = level; }

std::size_t Logger::warning_count() {
    std::lock_guard lock(g_log_mutex);
    return g_warnings.size();
}

}  // namespace aad
