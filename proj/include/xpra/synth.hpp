#pragma once

#include <cstdint>
#include <optional>

#include "xpra/guarantees.hpp"
#include "xpra/hsio.hpp"
#include "xpra/solver.hpp"

namespace xpra {

enum class DictionaryKind { gaussian_normalized, orthonormal_columns };

struct SynthSpec {
  std::size_t f = 10;
  std::size_t nm = 20;
  std::size_t r = 2;
  std::size_t d = 3;
  std::size_t s = 5;
  DictionaryKind kind = DictionaryKind::gaussian_normalized;
  double magnitude_low = 0.5;
  double magnitude_high = 1.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One draw of Y = X0 + R A0 with its guarantee report.
struct SynthInstance {
  Matrix Y;
  Matrix X0;
  Matrix A0;
  Matrix R;
  /// Absent when s = 0 (nothing to bound).
  std::optional<GuaranteeReport> report;
  /// Seed that produced the instance; differs from the requested seed only
  /// if a rank-deficient draw forced a retry.
  std::uint64_t seed_used = 0;
};

SynthInstance generate(const SynthSpec &spec);

struct RecoveryError {
  double rel_x = 0.0;
  double rel_a = 0.0;
  double support_f1 = 0.0;
};

/// relX = ||X_hat - X0||_F / max(||X0||_F, 1), relA likewise, and the F1
/// score of the support of A_hat (entries above 1e-6 * ||A_hat||_inf).
RecoveryError recovery_error(const Matrix &X_hat, const Matrix &A_hat, const Matrix &X0,
                             const Matrix &A0);

inline RecoveryError recovery_error(const DemixResult &est, const Matrix &X0, const Matrix &A0) {
  return recovery_error(est.X_hat, est.A_hat, X0, A0);
}

} // namespace xpra
