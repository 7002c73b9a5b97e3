#pragma once

#include <cstddef>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

namespace aad {

// Structured `key=value` log lines on stderr (and optionally a file).
// Usage: log_info("trial_done").kv("trial", id).kv("rows", n);
struct Logger {
    enum class Level { debug = 0, info = 1, warn = 2, error = 3 };
    static void open_file(const std::filesystem::path& path);
    static void close_file();
    static void set_level(Level level);
    static std::size_t warning_count();
};

class Record {
public:
    Record(Logger::Level level, std::string event) : level_(level), event_(std::move(event)) {}
    Record(const Record&) = delete;
    Record& operator=(const Record&) = delete;
    ~Record();

    template <typename T>
    Record& kv(const char* key, const T& value) {
        fields_ << ' ' << key << '=';
        if constexpr (std::is_convertible_v<T, std::string_view>) {
            std::string_view s = value;
            if (s.find(' ') != std::string_view::npos) fields_ << '"' << s << '"';
            else fields_ << s;
        } else {
            fields_ << value;
        }
        return *this;
    }

private:
    Logger::Level level_;
    std::string event_;
    std::ostringstream fields_;
};

inline Record log_debug(std::string event) { return {Logger::Level::debug, std::move(event)}; }
inline Record log_info(std::string event) { return {Logger::Level::info, std::move(event)}; }
inline Record log_warn(std::string event) { return {Logger::Level::warn, std::move(event)}; }
inline Record log_error(std::string event) { return {Logger::Level::error, std::move(event)}; }

}  // namespace aad
