#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rema {

/// Invalid parameters, or a table/dataset that does not match the requested agent.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. The message always starts with "line N:".
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace rema
