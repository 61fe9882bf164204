#pragma once

#include <stdexcept>
#include <string>

namespace dawnik {

// Malformed input text: carries the line and the JSON field path at fault.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, std::string field_path)
      : std::runtime_error(format(what, line, field_path)), line_(line), field_path_(std::move(field_path)) {}

  int line() const { return line_; }
  const std::string& field_path() const { return field_path_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& path) {
    std::string out = what;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    if (!path.empty()) out += " at " + path;
    return out;
  }

  int line_;
  std::string field_path_;
};

// Well-formed input that violates a model invariant (cycle, degenerate limits, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector length does not match the model's joint count.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid scenario, solver or proximity configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dawnik
