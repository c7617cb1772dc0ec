#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xpra/hsio.hpp"

namespace xpra {

struct FrameBounds {
  double lower = 0.0; // sigma_min(R)^2
  double upper = 0.0; // sigma_max(R)^2
};

/// Squared extreme singular values of R. For a fat R (d > f) the lower
/// bound is zero.
FrameBounds frame_bounds(const Matrix &R);

/// Relative singular-value floor below which R is treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Left inverse (R^T R)^{-1} R^T, computed from the SVD of R.
/// Throws Error{rank} when sigma_min < kRankTolerance * sigma_max.
Matrix pseudo_inverse(const Matrix &R);

/// Scales every column to unit Euclidean norm. Throws on a zero column.
Matrix normalize_columns(const Matrix &R);

/// Known dictionary with unit-norm atoms and cached frame bounds.
class Dictionary {
public:
  Dictionary() = default;

  /// Normalizes the columns of `raw` and caches frame bounds and, when R
  /// has full column rank, its pseudo-inverse.
  explicit Dictionary(const Matrix &raw);

  const Matrix &matrix() const { return atoms_; }
  Eigen::Index bands() const { return atoms_.rows(); }
  Eigen::Index size() const { return atoms_.cols(); }
  const FrameBounds &frame() const { return frame_; }
  bool has_pinv() const { return pinv_.has_value(); }
  /// Throws Error{rank} if R is not full column rank.
  const Matrix &pinv() const;

  static Dictionary identity(Eigen::Index d);

private:
  Matrix atoms_;
  FrameBounds frame_;
  std::optional<Matrix> pinv_;
  double sigma_min_ = 0.0;
};

/// Picks d distinct positive-class columns of Y uniformly without
/// replacement, then normalizes them.
Dictionary sample_dictionary(const Matrix &Y, const GroundTruthMask &mask,
                             std::size_t d, std::uint64_t seed);

/// Column indices chosen by sample_dictionary, in atom order.
std::vector<std::size_t> sample_atom_indices(const GroundTruthMask &mask,
                                             std::size_t d, std::uint64_t seed);

struct LearnOptions {
  std::size_t atoms = 4;
  double rho = 0.1;
  std::size_t iters = 50;
  std::size_t coding_iters = 100;
  std::uint64_t seed = 0;
};

struct LearnResult {
  Dictionary dictionary;
  Matrix codes;
  /// Objective after initialization, then after every outer round.
  std::vector<double> objective;
  std::size_t reseeded_atoms = 0;
};

/// Alternating minimization of 0.5 * ||Y - R A||_F^2 + rho * ||A||_1 over
/// unit-norm atoms R and codes A. Codes are updated by warm-started ISTA;
/// atoms by per-column least squares followed by renormalization, which is
/// the exact minimizer on the unit sphere, so the objective never increases.
LearnResult learn_dictionary(const Matrix &Y_pos, const LearnOptions &opts);

/// Extracts the columns of Y labelled positive.
Matrix positive_columns(const Matrix &Y, const GroundTruthMask &mask);

} // namespace xpra
