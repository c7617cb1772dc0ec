#include "xpra/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "xpra/error.hpp"
#include "xpra/log.hpp"

namespace xpra {

void SynthSpec::validate() const {
  if (f < 1 || nm < 1 || d < 1)
    throw Error(ErrorKind::invalid_argument, "synth: f, nm and d must be >= 1");
  if (r > std::min(f, nm))
    throw Error(ErrorKind::invalid_argument, "synth: r exceeds min(f, nm)");
  if (d > f)
    throw Error(ErrorKind::thin_violation, "synth: d exceeds f");
  if (s > d * nm)
    throw Error(ErrorKind::invalid_argument, "synth: s exceeds d * nm");
  if (!(magnitude_low > 0.0) || !(magnitude_high >= magnitude_low))
    throw Error(ErrorKind::invalid_argument, "synth: need 0 < magnitude_low <= magnitude_high");
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Matrix out(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      out(i, j) = g(rng);
  return out;
}

Eigen::Index numeric_rank(const Matrix &M) {
  if (M.size() == 0)
    return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  const Vector &sigma = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > 1e-8 * sigma(0))
    ++r;
  return r;
}

bool draw(const SynthSpec &spec, std::uint64_t seed, SynthInstance &out) {
  std::mt19937_64 rng(seed);
  const auto f = Eigen::Index(spec.f), nm = Eigen::Index(spec.nm), r = Eigen::Index(spec.r),
             d = Eigen::Index(spec.d);

  if (r > 0) {
    const Matrix P = gaussian(f, r, rng);
    const Matrix Q = gaussian(nm, r, rng);
    out.X0 = P * Q.transpose();
    if (numeric_rank(out.X0) != r)
      return false;
  } else {
    out.X0 = Matrix::Zero(f, nm);
  }

  const Matrix G = gaussian(f, d, rng);
  if (spec.kind == DictionaryKind::orthonormal_columns) {
    Eigen::HouseholderQR<Matrix> qr(G);
    out.R = qr.householderQ() * Matrix::Identity(f, d);
  } else {
    out.R = G;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const double nrm = out.R.col(j).norm();
    if (!(nrm > 0.0))
      return false;
    out.R.col(j) /= nrm;
  }
  if (numeric_rank(out.R) != d)
    return false;

  // Global support: s positions of the d x nm grid, uniform without
  // replacement (partial Fisher-Yates over linear indices).
  std::vector<std::size_t> cells(spec.d * spec.nm);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  for (std::size_t i = 0; i < spec.s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, cells.size() - 1);
    std::swap(cells[i], cells[pick(rng)]);
  }
  std::uniform_real_distribution<double> mag(spec.magnitude_low, spec.magnitude_high);
  std::bernoulli_distribution sign(0.5);
  out.A0 = Matrix::Zero(d, nm);
  for (std::size_t i = 0; i < spec.s; ++i) {
    const double v = mag(rng);
    const auto atom = Eigen::Index(cells[i] % spec.d);
    const auto col = Eigen::Index(cells[i] / spec.d);
    out.A0(atom, col) = sign(rng) ? v : -v;
  }

  out.Y = out.X0 + out.R * out.A0;
  return true;
}

} // namespace

SynthInstance generate(const SynthSpec &spec) {
  spec.validate();
  SynthInstance out;
  std::uint64_t seed = spec.seed;
  constexpr int kMaxRetries = 64;
  for (int attempt = 0;; ++attempt, ++seed) {
    if (draw(spec, seed, out))
      break;
    if (attempt == kMaxRetries)
      throw Error(ErrorKind::numerical, "synth: repeated rank-deficient draws");
    log_warning("synth: rank-deficient draw at seed " + std::to_string(seed) +
                ", retrying with seed " + std::to_string(seed + 1));
  }
  out.seed_used = seed;
  if (spec.s > 0)
    out.report = diagnose(out.X0, out.A0, out.R);
  return out;
}

RecoveryError recovery_error(const Matrix &X_hat, const Matrix &A_hat, const Matrix &X0,
                             const Matrix &A0) {
  if (X_hat.rows() != X0.rows() || X_hat.cols() != X0.cols() || A_hat.rows() != A0.rows() ||
      A_hat.cols() != A0.cols())
    throw Error(ErrorKind::shape, "recovery_error: estimate and truth shapes differ");
  RecoveryError out;
  out.rel_x = (X_hat - X0).norm() / std::max(X0.norm(), 1.0);
  out.rel_a = (A_hat - A0).norm() / std::max(A0.norm(), 1.0);

  const double amax = A_hat.size() ? A_hat.cwiseAbs().maxCoeff() : 0.0;
  const double cut = 1e-6 * amax;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (Eigen::Index j = 0; j < A0.cols(); ++j)
    for (Eigen::Index i = 0; i < A0.rows(); ++i) {
      const bool est = amax > 0.0 && std::abs(A_hat(i, j)) > cut;
      const bool truth = A0(i, j) != 0.0;
      tp += est && truth;
      fp += est && !truth;
      fn += !est && truth;
    }
  out.support_f1 = (tp + fp + fn) == 0 ? 1.0 : 2.0 * double(tp) / double(2 * tp + fp + fn);
  return out;
}

} // namespace xpra
