#pragma once

#include <cstddef>
#include <vector>

#include "xpra/dict.hpp"
#include "xpra/hsio.hpp"

namespace xpra {

/// Tuning for the accelerated proximal gradient solver.
struct ApgConfig {
  double continuation = 0.95; ///< nu <- max(continuation * nu, nu_floor) per stage
  double nu_init = 0.0;       ///< <= 0 selects the spectral norm of Y
  double nu_floor = 1e-4;
  std::size_t max_iters = 500; ///< per continuation stage
  double rel_tol = 1e-6;
  double lambda = 0.0;

  void validate() const;
};

struct DemixResult {
  Matrix X_hat;
  Matrix A_hat;
  /// Smoothed objective at the accepted iterate, one entry per inner step.
  std::vector<double> objective_trace;
  /// Continuation stage of each objective_trace entry.
  std::vector<std::size_t> trace_stage;
  /// nu used by each stage.
  std::vector<double> stage_nu;
  std::size_t iterations = 0;
  bool converged = false;
  double lambda_used = 0.0;
  /// ||Y - X_hat - R A_hat||_F / ||Y||_F
  double relative_residual = 0.0;
};

/// Solves min ||X||_* + lambda ||A||_1 s.t. Y = X + R A through the
/// penalized surrogate
///
///   F_nu(X, A) = 0.5 ||Y - X - R A||_F^2 + nu (||X||_* + lambda ||A||_1)
///
/// with nu decreased geometrically to nu_floor, one warm-started stage per
/// value. Each stage runs monotone FISTA with step 1 / (1 + sigma_max(R)^2).
DemixResult demix(const Matrix &Y, const Matrix &R, const ApgConfig &cfg);

inline DemixResult demix(const Matrix &Y, const Dictionary &R, const ApgConfig &cfg) {
  return demix(Y, R.matrix(), cfg);
}

/// Two-step baseline: robust PCA on R^+ Y (identity dictionary), then
/// X_hat = Y - R A_hat.
DemixResult rpca_dagger(const Matrix &Y, const Dictionary &R, const ApgConfig &cfg);

/// ||R^T Y||_inf / ||Y||_2, the upper end of the lambda sweep.
double lambda_upper(const Matrix &Y, const Matrix &R);

/// `count` evenly spaced values in (0, lambda_upper], endpoint included.
std::vector<double> lambda_grid(const Matrix &Y, const Matrix &R, std::size_t count);

/// The smoothed objective F_nu.
double smoothed_objective(const Matrix &Y, const Matrix &R, const Matrix &X, const Matrix &A,
                          double nu, double lambda);

} // namespace xpra
