#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xpra/dict.hpp"
#include "xpra/hsio.hpp"
#include "xpra/solver.hpp"

namespace xpra {

enum class Method { xpra, rpca_dagger, mf, mf_dagger };

std::string_view to_string(Method m);
/// Accepts the CLI spellings: xpra, rpca-dagger, mf, mf-dagger.
Method parse_method(std::string_view name);

struct ScoreVector {
  std::vector<double> scores;
  Method method = Method::xpra;
  bool flipped = false;
};

/// Euclidean norm of every column of A_hat.
ScoreVector column_norm_scores(const Matrix &A_hat, Method method = Method::xpra);

/// max_i |<r_i, y_j / ||y_j||>|; zero columns score 0.
ScoreVector matched_filter(const Matrix &Y, const Dictionary &R);

/// Max absolute entry of each column-normalized column of R^+ Y.
ScoreVector matched_filter_dagger(const Matrix &Y, const Dictionary &R);

enum class Sweep {
  score_values, ///< every distinct score value (exact ROC)
  fixed_grid,   ///< 1000 evenly spaced thresholds in (0, 1]
};

inline constexpr std::size_t kFixedGridSize = 1000;

struct RocPoint {
  double threshold = 0.0; ///< +inf / -inf for the (0,0) / (1,1) endpoints
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points; ///< FPR non-decreasing, (0,0) first, (1,1) last
  double auc = 0.0;
  RocPoint best;                ///< maximizes TPR - FPR
  bool flipped = false;
};

/// Predicts positive where score > threshold. With allow_flip, a curve with
/// AUC < 0.5 is recomputed on inverted scores (negated for value sweeps,
/// 1 - score for the fixed grid) and marked flipped.
RocCurve roc(const ScoreVector &scores, const GroundTruthMask &mask, Sweep sweep,
             bool allow_flip);

/// Binary detections at a threshold, in mask format.
std::vector<std::uint8_t> detection_mask(const ScoreVector &scores, double threshold);

struct LambdaTrial {
  double lambda = 0.0;
  std::optional<double> auc; ///< empty when the solver failed
  std::string error;
};

struct LambdaSweepResult {
  double lambda = 0.0;
  RocCurve curve;
  DemixResult demix;
  std::vector<LambdaTrial> trials;
};

/// Runs the solver for every lambda, scores by column norms of A_hat and
/// returns the lambda with the largest AUC (ties go to the smaller lambda).
/// `method` must be xpra or rpca_dagger. Trials run on up to `jobs` threads
/// and are merged by grid index.
LambdaSweepResult best_auc_over_lambda(const Matrix &Y, const Dictionary &R,
                                       const GroundTruthMask &mask,
                                       const std::vector<double> &grid, const ApgConfig &cfg,
                                       Method method = Method::xpra, bool allow_flip = false,
                                       std::size_t jobs = 1);

/// Lambda grid appropriate to the method: R^T Y against ||Y|| for xpra,
/// the transformed data against itself for rpca_dagger.
std::vector<double> method_lambda_grid(const Matrix &Y, const Dictionary &R, Method method,
                                       std::size_t count);

/// One row of a method comparison table.
struct MethodRow {
  Method method = Method::xpra;
  std::optional<double> threshold; ///< empty for the matched filters
  double tpr = 0.0;
  double fpr = 0.0;
  double auc = 0.0;
  bool flipped = false;
  std::optional<double> lambda;
};

struct TableOptions {
  std::size_t lambda_count = 100;
  ApgConfig cfg;
  bool allow_flip = true;
  std::size_t jobs = 1;
};

/// Evaluates all four methods on one dataset and dictionary.
std::vector<MethodRow> roc_table(const Matrix &Y, const Dictionary &R, const GroundTruthMask &mask,
                                 const TableOptions &opts);

nlohmann::json to_json(const RocCurve &curve);

} // namespace xpra
