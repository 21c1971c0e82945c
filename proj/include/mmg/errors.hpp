#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmg {

/// Invalid parameters, topology, or table/history mismatch.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed configuration text. Line and column are 1-based.
class SyntaxError : public ConfigError {
public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& what)
        : ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                      what),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace mmg
