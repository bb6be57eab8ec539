#pragma once

#include <stdexcept>
#include <string>

namespace edghdg {

// Invalid user input: malformed mesh files, inconsistent run configuration,
// unsupported polynomial degrees. Maps to CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear solver breakdown (structurally or numerically singular system).
// Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edghdg
