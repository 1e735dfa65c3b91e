#pragma once

#include <stdexcept>
#include <string>

namespace matchshap {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input text could not be parsed. `line` is 1-based.
struct ParseError : Error {
  int line;
  ParseError(int line_, const std::string& message)
      : Error("line " + std::to_string(line_) + ": " + message), line(line_) {}
};

// The request is well-formed but outside the configured size bounds, or the
// selected method does not apply to the instance.
struct CapabilityError : Error {
  using Error::Error;
};

}  // namespace matchshap
