#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msdpool {

/// All durations are integer error-correction cycles.
using Cycle = std::int64_t;

/// A precondition or configuration violation. The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A filesystem failure. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace msdpool
