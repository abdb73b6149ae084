#include "rzl/error.hpp"

namespace rzl {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::domain: return "domain";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::conditioning: return "conditioning";
    case ErrorKind::accuracy: return "accuracy";
  }
  return "unknown";
}

}  // namespace rzl
