#include "xpra/dict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "xpra/error.hpp"
#include "xpra/log.hpp"
#include "xpra/prox.hpp"

namespace xpra {

namespace {

Vector singular_values(const Matrix &R) {
  Eigen::JacobiSVD<Matrix> svd(R);
  return svd.singularValues();
}

} // namespace

FrameBounds frame_bounds(const Matrix &R) {
  if (R.size() == 0)
    throw Error(ErrorKind::shape, "frame_bounds: empty dictionary");
  const Vector sigma = singular_values(R);
  const double smax = sigma(0);
  // sigma has min(f, d) entries; a fat R has a nontrivial null space.
  const double smin = R.cols() > R.rows() ? 0.0 : sigma(sigma.size() - 1);
  return {smin * smin, smax * smax};
}

Matrix pseudo_inverse(const Matrix &R) {
  if (R.size() == 0)
    throw Error(ErrorKind::shape, "pseudo_inverse: empty dictionary");
  if (R.cols() > R.rows())
    throw Error(ErrorKind::rank, "pseudo_inverse: dictionary has more atoms than bands");
  Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &sigma = svd.singularValues();
  const double smin = sigma(sigma.size() - 1);
  if (!(smin >= kRankTolerance * sigma(0)) || sigma(0) == 0.0) {
    std::ostringstream msg;
    msg << "dictionary is rank deficient (sigma_min = " << smin
        << ", sigma_max = " << sigma(0) << ")";
    throw Error(ErrorKind::rank, msg.str());
  }
  return svd.matrixV() * sigma.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Matrix normalize_columns(const Matrix &R) {
  Matrix out = R;
  for (Eigen::Index j = 0; j < R.cols(); ++j) {
    const double nrm = R.col(j).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm))
      throw Error(ErrorKind::degenerate_input,
                  "dictionary atom " + std::to_string(j) + " has zero or non-finite norm");
    out.col(j) /= nrm;
  }
  return out;
}

Dictionary::Dictionary(const Matrix &raw) : atoms_(normalize_columns(raw)) {
  frame_ = frame_bounds(atoms_);
  sigma_min_ = std::sqrt(frame_.lower);
  if (atoms_.cols() <= atoms_.rows()) {
    try {
      pinv_ = pseudo_inverse(atoms_);
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::rank)
        throw;
    }
  }
}

const Matrix &Dictionary::pinv() const {
  if (!pinv_) {
    std::ostringstream msg;
    msg << "dictionary is not full column rank (sigma_min = " << sigma_min_ << ")";
    throw Error(ErrorKind::rank, msg.str());
  }
  return *pinv_;
}

Dictionary Dictionary::identity(Eigen::Index d) { return Dictionary(Matrix::Identity(d, d)); }

std::vector<std::size_t> sample_atom_indices(const GroundTruthMask &mask, std::size_t d,
                                             std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < mask.labels.size(); ++j)
    if (mask.labels[j] == 1)
      pool.push_back(j);
  if (d > pool.size())
    throw Error(ErrorKind::insufficient_samples,
                "requested " + std::to_string(d) + " atoms but the mask has only " +
                    std::to_string(pool.size()) + " positive voxels");
  // Partial Fisher-Yates: the first d slots end up a uniform draw.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < d; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(d);
  return pool;
}

Dictionary sample_dictionary(const Matrix &Y, const GroundTruthMask &mask, std::size_t d,
                             std::uint64_t seed) {
  if (mask.labels.size() != std::size_t(Y.cols()))
    throw Error(ErrorKind::shape, "mask length differs from data column count");
  const auto idx = sample_atom_indices(mask, d, seed);
  Matrix raw(Y.rows(), d);
  for (std::size_t k = 0; k < d; ++k)
    raw.col(k) = Y.col(idx[k]);
  return Dictionary(raw);
}

Matrix positive_columns(const Matrix &Y, const GroundTruthMask &mask) {
  if (mask.labels.size() != std::size_t(Y.cols()))
    throw Error(ErrorKind::shape, "mask length differs from data column count");
  Matrix out(Y.rows(), mask.positives());
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < mask.labels.size(); ++j)
    if (mask.labels[j] == 1)
      out.col(k++) = Y.col(j);
  return out;
}

namespace {

double learning_objective(const Matrix &Y, const Matrix &R, const Matrix &A, double rho) {
  return 0.5 * (Y - R * A).squaredNorm() + rho * A.cwiseAbs().sum();
}

Vector random_unit(Eigen::Index f, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Vector v(f);
  for (Eigen::Index i = 0; i < f; ++i)
    v(i) = g(rng);
  return v / v.norm();
}

// Replacement atom drawn from a nonzero residual column, or a random
// direction when the residual vanishes.
Vector reseed_atom(const Matrix &residual, std::mt19937_64 &rng) {
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < residual.cols(); ++j)
    if (residual.col(j).norm() > 0.0)
      live.push_back(j);
  if (live.empty())
    return random_unit(residual.rows(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
  const Vector c = residual.col(live[pick(rng)]);
  return c / c.norm();
}

} // namespace

LearnResult learn_dictionary(const Matrix &Y_pos, const LearnOptions &opts) {
  const Eigen::Index f = Y_pos.rows();
  const auto d = static_cast<Eigen::Index>(opts.atoms);
  if (d < 1)
    throw Error(ErrorKind::invalid_argument, "learn_dictionary: need at least one atom");
  if (d > f)
    throw Error(ErrorKind::thin_violation, "learn_dictionary: d = " + std::to_string(d) +
                                               " exceeds f = " + std::to_string(f));
  if (!(opts.rho > 0.0))
    throw Error(ErrorKind::invalid_argument, "learn_dictionary: rho must be > 0");
  if (Y_pos.cols() < 1)
    throw Error(ErrorKind::insufficient_samples, "learn_dictionary: no training voxels");

  std::mt19937_64 rng(opts.seed);
  LearnResult out;

  // Initial atoms: distinct random training columns, topped up with random
  // directions when there are fewer usable columns than atoms.
  std::vector<Eigen::Index> order(Y_pos.cols());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix R(f, d);
  Eigen::Index filled = 0;
  for (Eigen::Index j : order) {
    if (filled == d)
      break;
    const double nrm = Y_pos.col(j).norm();
    if (nrm > 0.0)
      R.col(filled++) = Y_pos.col(j) / nrm;
  }
  for (; filled < d; ++filled)
    R.col(filled) = random_unit(f, rng);

  Matrix A = Matrix::Zero(d, Y_pos.cols());
  out.objective.push_back(learning_objective(Y_pos, R, A, opts.rho));

  for (std::size_t round = 0; round < opts.iters; ++round) {
    // Sparse coding by ISTA, warm-started from the previous codes.
    const double L = std::max(frame_bounds(R).upper, 1e-300);
    const Matrix RtY = R.transpose() * Y_pos;
    const Matrix G = R.transpose() * R;
    for (std::size_t k = 0; k < opts.coding_iters; ++k)
      A = soft_threshold(A - (G * A - RtY) / L, opts.rho / L);

    // Atom updates, one column at a time against the current residual.
    Matrix E = Y_pos - R * A;
    for (Eigen::Index j = 0; j < d; ++j) {
      E.noalias() += R.col(j) * A.row(j);
      const Vector g = E * A.row(j).transpose();
      const double gn = g.norm();
      if (gn > 0.0 && std::isfinite(gn)) {
        R.col(j) = g / gn;
      } else {
        R.col(j) = reseed_atom(E, rng);
        ++out.reseeded_atoms;
        log_warning("learn_dictionary: atom " + std::to_string(j) + " collapsed in round " +
                    std::to_string(round) + ", re-seeded from the residual");
      }
      E.noalias() -= R.col(j) * A.row(j);
    }
    out.objective.push_back(learning_objective(Y_pos, R, A, opts.rho));
  }

  out.dictionary = Dictionary(R);
  out.codes = std::move(A);
  return out;
}

} // namespace xpra
