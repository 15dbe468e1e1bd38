#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace objcomp {

/// Failure classes, mapped one-to-one onto the CLI exit codes 2, 3 and 4.
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message, std::string field = {})
        : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Config field or file path the error refers to; may be empty.
    const std::string& field() const noexcept { return field_; }

  private:
    ErrorKind kind_;
    std::string field_;
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : Error(ErrorKind::config, message, std::move(field)) {}
};

class DataError : public Error {
  public:
    explicit DataError(const std::string& message, std::string field = {})
        : Error(ErrorKind::data, message, std::move(field)) {}
};

class NumericError : public Error {
  public:
    explicit NumericError(const std::string& message, std::string field = {})
        : Error(ErrorKind::numeric, message, std::move(field)) {}
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public DataError {
  public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : DataError(source + ":" + std::to_string(line) + ": " + message, source), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

} // namespace objcomp
