#include "xpra/solver.hpp"

#include <algorithm>
#include <cmath>

#include "xpra/error.hpp"
#include "xpra/log.hpp"
#include "xpra/prox.hpp"

namespace xpra {

void ApgConfig::validate() const {
  if (!(continuation > 0.0 && continuation < 1.0))
    throw Error(ErrorKind::invalid_argument, "continuation factor must lie in (0, 1)");
  if (!(nu_floor > 0.0))
    throw Error(ErrorKind::invalid_argument, "nu_floor must be > 0");
  if (nu_init > 0.0 && nu_init < nu_floor)
    throw Error(ErrorKind::invalid_argument, "nu_init must be >= nu_floor");
  if (!(rel_tol > 0.0))
    throw Error(ErrorKind::invalid_argument, "rel_tol must be > 0");
  if (max_iters < 1)
    throw Error(ErrorKind::invalid_argument, "max_iters must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::invalid_argument, "lambda must be finite and >= 0");
}

double smoothed_objective(const Matrix &Y, const Matrix &R, const Matrix &X, const Matrix &A,
                          double nu, double lambda) {
  Eigen::BDCSVD<Matrix> svd(X.cols() > X.rows() ? Matrix(X.transpose()) : X);
  return 0.5 * (Y - X - R * A).squaredNorm() +
         nu * (svd.singularValues().sum() + lambda * A.cwiseAbs().sum());
}

double lambda_upper(const Matrix &Y, const Matrix &R) {
  const double ynorm = spectral_norm(Y);
  if (!(ynorm > 0.0))
    throw Error(ErrorKind::degenerate_input, "lambda_upper: data matrix is zero");
  return (R.transpose() * Y).cwiseAbs().maxCoeff() / ynorm;
}

std::vector<double> lambda_grid(const Matrix &Y, const Matrix &R, std::size_t count) {
  if (count < 1)
    throw Error(ErrorKind::invalid_argument, "lambda_grid: count must be >= 1");
  const double top = lambda_upper(Y, R);
  std::vector<double> grid(count);
  for (std::size_t k = 1; k <= count; ++k)
    grid[k - 1] = top * (double(k) / double(count));
  return grid;
}

namespace {

void check_finite(const Matrix &M, const char *what, std::size_t iter) {
  if (!M.allFinite())
    throw Error(ErrorKind::divergence,
                std::string("demix: non-finite ") + what + " at iteration " + std::to_string(iter));
}

} // namespace

DemixResult demix(const Matrix &Y, const Matrix &R, const ApgConfig &cfg) {
  cfg.validate();
  if (R.rows() != Y.rows())
    throw Error(ErrorKind::shape, "demix: dictionary has " + std::to_string(R.rows()) +
                                      " rows but data has " + std::to_string(Y.rows()));
  if (Y.size() == 0 || R.cols() == 0)
    throw Error(ErrorKind::shape, "demix: empty input");
  if (!Y.allFinite() || !R.allFinite())
    throw Error(ErrorKind::numerical, "demix: non-finite input");

  const double lambda = cfg.lambda;
  const double lipschitz = 1.0 + std::pow(spectral_norm(R), 2);
  double nu = cfg.nu_init > 0.0 ? cfg.nu_init : spectral_norm(Y);
  nu = std::max(nu, cfg.nu_floor);

  const Eigen::Index f = Y.rows(), cols = Y.cols(), d = R.cols();
  DemixResult out;
  out.lambda_used = lambda;

  Matrix X = Matrix::Zero(f, cols), A = Matrix::Zero(d, cols);
  double x_nuclear = 0.0;

  auto objective = [&](const Matrix &Xc, const Matrix &Ac, double nuclear, double nu_c) {
    return 0.5 * (Y - Xc - R * Ac).squaredNorm() + nu_c * (nuclear + lambda * Ac.cwiseAbs().sum());
  };

  std::size_t stage = 0;
  bool stage_converged = false;
  for (;;) {
    out.stage_nu.push_back(nu);
    double t = 1.0;
    Matrix X_ext = X, A_ext = A;     // extrapolated point
    Matrix Zx_prev = X, Za_prev = A; // previous prox output
    double current = objective(X, A, x_nuclear, nu);
    stage_converged = false;

    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
      const Matrix E = Y - X_ext - R * A_ext;
      SvtResult zx = svt_with_spectrum(X_ext + E / lipschitz, nu / lipschitz);
      Matrix Za = soft_threshold(A_ext + (R.transpose() * E) / lipschitz, nu * lambda / lipschitz);
      ++out.iterations;
      check_finite(zx.value, "low-rank iterate", out.iterations);
      check_finite(Za, "sparse iterate", out.iterations);

      const double z_nuclear = zx.singular_values.sum();
      const double candidate = objective(zx.value, Za, z_nuclear, nu);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

      // Monotone variant: keep the better of the prox output and the
      // previous iterate, but extrapolate through the prox output.
      Matrix X_new, A_new;
      if (candidate <= current) {
        X_new = zx.value;
        A_new = Za;
        x_nuclear = z_nuclear;
        current = candidate;
      } else {
        X_new = X;
        A_new = A;
      }
      X_ext = X_new + (t / t_next) * (zx.value - X_new) + ((t - 1.0) / t_next) * (X_new - X);
      A_ext = A_new + (t / t_next) * (Za - A_new) + ((t - 1.0) / t_next) * (A_new - A);
      X = std::move(X_new);
      A = std::move(A_new);
      t = t_next;

      out.objective_trace.push_back(current);
      out.trace_stage.push_back(stage);

      const double change =
          std::sqrt((zx.value - Zx_prev).squaredNorm() + (Za - Za_prev).squaredNorm());
      const double scale = std::sqrt(zx.value.squaredNorm() + Za.squaredNorm());
      Zx_prev = std::move(zx.value);
      Za_prev = std::move(Za);
      if (change == 0.0 || change < cfg.rel_tol * scale) {
        stage_converged = true;
        break;
      }
    }

    if (nu <= cfg.nu_floor)
      break;
    nu = std::max(cfg.continuation * nu, cfg.nu_floor);
    ++stage;
  }

  out.converged = stage_converged;
  if (!out.converged)
    log_info("demix: final stage hit max_iters before rel_tol");
  out.X_hat = std::move(X);
  out.A_hat = std::move(A);
  const double ynorm = Y.norm();
  out.relative_residual = (Y - out.X_hat - R * out.A_hat).norm() / ynorm;
  return out;
}

DemixResult rpca_dagger(const Matrix &Y, const Dictionary &R, const ApgConfig &cfg) {
  const Matrix &pinv = R.pinv();
  if (R.bands() != Y.rows())
    throw Error(ErrorKind::shape, "rpca_dagger: dictionary rows differ from data rows");
  const Matrix Y_tilde = pinv * Y;
  const Matrix I = Matrix::Identity(R.size(), R.size());
  DemixResult out = demix(Y_tilde, I, cfg);
  out.X_hat = Y - R.matrix() * out.A_hat;
  out.relative_residual = (Y - out.X_hat - R.matrix() * out.A_hat).norm() / Y.norm();
  return out;
}

} // namespace xpra
