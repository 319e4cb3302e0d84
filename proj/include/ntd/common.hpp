#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ntd {

inline constexpr const char* kToolVersion = "0.1.0";

/// Mismatched matrix/vector shapes.
class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values produced by an iterative computation.
class numeric_error : public std::runtime_error {
 public:
  numeric_error(const std::string& msg, std::size_t iteration)
      : std::runtime_error(msg), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_ = 0;
};

inline void warn(const std::string& msg) {
  std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace ntd
