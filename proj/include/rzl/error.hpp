#pragma once

#include <stdexcept>
#include <string>

namespace rzl {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  precondition,   // bad input: off-boundary point, unsupported profile, size limits
  domain,         // non-finite argument to a special function
  singularity,    // F_m vanished where a logarithm was needed
  degenerate,     // tangential direction or near-coincident points
  conditioning,   // near-singular covariance block
  accuracy,       // quadrature or root-finding failed its own convergence gate
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace rzl
