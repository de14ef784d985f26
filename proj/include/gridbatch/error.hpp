#pragma once

#include <stdexcept>
#include <string>

namespace gridbatch {

/// Bad input text or file: malformed rows, schema violations, dangling references.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// Structurally invalid network (no slack, islands, singular series element, ...).
class NetworkError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand shapes that do not agree.
class DimensionError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Singular factorization or a collapsing iterate.
class NumericalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gridbatch
