#pragma once

#include <stdexcept>
#include <string>

namespace lpf {

enum class ErrorKind {
  io,
  format,
  dimension_mismatch,
  invalid_argument,
  degenerate_geometry,
  image_too_small,
  non_finite,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lpf
