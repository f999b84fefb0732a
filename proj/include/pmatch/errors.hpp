#pragma once

#include <stdexcept>
#include <string>

namespace pmatch {

// Bad file contents, unparsable input, inconsistent user-provided data.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mesh defects that cannot be repaired or violate an operation's preconditions.
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization failures: no incumbent within budget, numerical breakdown.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pmatch
