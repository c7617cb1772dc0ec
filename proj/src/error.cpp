#include "xpra/error.hpp"

namespace xpra {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::format: return "format";
  case ErrorKind::size: return "size";
  case ErrorKind::io: return "io";
  case ErrorKind::degenerate_input: return "degenerate-input";
  case ErrorKind::insufficient_samples: return "insufficient-samples";
  case ErrorKind::thin_violation: return "thin-violation";
  case ErrorKind::rank: return "rank";
  case ErrorKind::shape: return "shape";
  case ErrorKind::divergence: return "divergence";
  case ErrorKind::convergence: return "convergence";
  case ErrorKind::numerical: return "numerical";
  case ErrorKind::trivial_instance: return "trivial-instance";
  case ErrorKind::degenerate_mask: return "degenerate-mask";
  case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

} // namespace xpra
