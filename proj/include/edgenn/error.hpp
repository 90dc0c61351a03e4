#pragma once

#include <stdexcept>
#include <string>

namespace edgenn {

/// Bad argument to a library call: non-finite coordinates, dimension
/// mismatch, unknown ids, violated preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed scene/roadmap file. `where()` names the offending line or field.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace edgenn
