#pragma once

#include <stdexcept>
#include <string>

namespace paveval {

// Bad values: out-of-range parameters, violated invariants, unknown ids.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input documents (XML/JSON/DarkNet text).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / image codec failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace paveval
