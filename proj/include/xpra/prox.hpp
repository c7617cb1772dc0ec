#pragma once

#include "xpra/hsio.hpp"

namespace xpra {

/// Entrywise sign(m) * max(|m| - tau, 0).
Matrix soft_threshold(const Matrix &M, double tau);

struct SvtResult {
  Matrix value;
  /// Singular values of `value`, i.e. the thresholded singular values of M.
  Vector singular_values;
};

/// Singular value thresholding: the prox of tau * ||.||_* at M.
SvtResult svt_with_spectrum(const Matrix &M, double tau);

inline Matrix svt(const Matrix &M, double tau) { return svt_with_spectrum(M, tau).value; }

/// Largest singular value.
double spectral_norm(const Matrix &M);

} // namespace xpra
