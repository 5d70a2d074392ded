#pragma once

#include <stdexcept>
#include <string>

namespace spinfreeze {

// File/stream failures (missing files, malformed rows, write errors).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A fit did not reach the gradient tolerance. Carries the diagnostics
// string of the failed fit so callers can report it.
class FitConvergenceError : public std::runtime_error {
 public:
  explicit FitConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinfreeze
