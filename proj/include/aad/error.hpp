#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aad {

// Exit-code classes used by the CLI: 2 config, 3 data, 4 numerical.
enum class ErrorClass { config = 2, data = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorClass::data, what) {}
};

/// Bad magic or unsupported version in a matrix stream.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorClass::data, what) {}
};

/// Payload shorter (or longer) than the header promises.
class CorruptionError : public Error {
public:
    CorruptionError(const std::string& what, std::size_t expected, std::size_t actual)
        : Error(ErrorClass::data, what), expected_bytes(expected), actual_bytes(actual) {}
    std::size_t expected_bytes;
    std::size_t actual_bytes;
};

class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, std::string missing_path)
        : Error(ErrorClass::data, what), path(std::move(missing_path)) {}
    std::string path;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::size_t offset)
        : Error(ErrorClass::data, what), byte_offset(offset) {}
    std::size_t byte_offset;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class DegenerateRankError : public NumericalError {
public:
    DegenerateRankError(const std::string& what, std::size_t achieved, double leading)
        : NumericalError(what), rank(achieved), leading_variance(leading) {}
    std::size_t rank;
    double leading_variance;
};

}  // namespace aad
