#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdgnn {

// Input data failed validation. Carries a 1-based line number when the
// source is line-oriented (0 when it is not).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// The input is structurally unusable (missing column, bad header, bad file).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdgnn
