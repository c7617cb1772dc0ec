#include "xpra/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "xpra/error.hpp"
#include "xpra/log.hpp"

namespace xpra {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(Method m) {
  switch (m) {
  case Method::xpra: return "XpRA";
  case Method::rpca_dagger: return "RPCA-dagger";
  case Method::mf: return "MF";
  case Method::mf_dagger: return "MF-dagger";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "xpra") return Method::xpra;
  if (name == "rpca-dagger") return Method::rpca_dagger;
  if (name == "mf") return Method::mf;
  if (name == "mf-dagger") return Method::mf_dagger;
  throw Error(ErrorKind::invalid_argument, "unknown method '" + std::string(name) + "'");
}

ScoreVector column_norm_scores(const Matrix &A_hat, Method method) {
  if (!A_hat.allFinite())
    throw Error(ErrorKind::numerical, "column_norm_scores: non-finite coefficients");
  ScoreVector out;
  out.method = method;
  out.scores.resize(A_hat.cols());
  for (Eigen::Index j = 0; j < A_hat.cols(); ++j)
    out.scores[j] = A_hat.col(j).norm();
  return out;
}

namespace {

// Columns scaled to unit norm; zero columns stay zero.
Matrix normalized_columns(const Matrix &M, std::size_t &zero_columns) {
  Matrix out = M;
  zero_columns = 0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double nrm = M.col(j).norm();
    if (nrm > 0.0)
      out.col(j) /= nrm;
    else
      ++zero_columns;
  }
  return out;
}

ScoreVector max_abs_scores(const Matrix &M, Method method) {
  ScoreVector out;
  out.method = method;
  out.scores.resize(M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    out.scores[j] = M.rows() ? M.col(j).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

} // namespace

ScoreVector matched_filter(const Matrix &Y, const Dictionary &R) {
  if (R.bands() != Y.rows())
    throw Error(ErrorKind::shape, "matched_filter: dictionary rows differ from data rows");
  std::size_t zeros = 0;
  const Matrix Yn = normalized_columns(Y, zeros);
  if (zeros)
    log_warning("matched_filter: " + std::to_string(zeros) + " zero data columns scored 0");
  return max_abs_scores(R.matrix().transpose() * Yn, Method::mf);
}

ScoreVector matched_filter_dagger(const Matrix &Y, const Dictionary &R) {
  if (R.bands() != Y.rows())
    throw Error(ErrorKind::shape, "matched_filter_dagger: dictionary rows differ from data rows");
  std::size_t zeros = 0;
  const Matrix Yt = normalized_columns(R.pinv() * Y, zeros);
  if (zeros)
    log_warning("matched_filter_dagger: " + std::to_string(zeros) +
                " zero transformed columns scored 0");
  return max_abs_scores(Yt, Method::mf_dagger);
}

namespace {

RocCurve trace_curve(const std::vector<double> &scores, const GroundTruthMask &mask, Sweep sweep) {
  const std::size_t n = scores.size();
  const double P = double(mask.positives());
  const double N = double(n) - P;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> thresholds;
  if (sweep == Sweep::score_values) {
    for (std::size_t k = 0; k < n; ++k)
      if (k == 0 || scores[order[k]] != scores[order[k - 1]])
        thresholds.push_back(scores[order[k]]);
  } else {
    thresholds.push_back(kInf);
    for (std::size_t k = kFixedGridSize; k >= 1; --k)
      thresholds.push_back(double(k) / double(kFixedGridSize));
  }

  RocCurve curve;
  std::size_t tp = 0, fp = 0, cursor = 0;
  for (double t : thresholds) {
    while (cursor < n && scores[order[cursor]] > t) {
      (mask.labels[order[cursor]] == 1 ? tp : fp)++;
      ++cursor;
    }
    curve.points.push_back({t, double(tp) / P, double(fp) / N});
  }
  curve.points.push_back({-kInf, 1.0, 1.0});

  double auc = 0.0;
  curve.best = curve.points.front();
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto &a = curve.points[k - 1];
    const auto &b = curve.points[k];
    auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
    if (b.tpr - b.fpr > curve.best.tpr - curve.best.fpr)
      curve.best = b;
  }
  curve.auc = auc;
  return curve;
}

} // namespace

RocCurve roc(const ScoreVector &scores, const GroundTruthMask &mask, Sweep sweep,
             bool allow_flip) {
  if (scores.scores.size() != mask.labels.size())
    throw Error(ErrorKind::shape, "roc: score and mask lengths differ");
  const std::size_t P = mask.positives();
  if (P == 0 || P == mask.labels.size())
    throw Error(ErrorKind::degenerate_mask, "roc: mask must contain both classes");
  for (double s : scores.scores)
    if (!std::isfinite(s))
      throw Error(ErrorKind::numerical, "roc: non-finite score");

  RocCurve curve = trace_curve(scores.scores, mask, sweep);
  curve.flipped = scores.flipped;
  if (allow_flip && curve.auc < 0.5) {
    std::vector<double> inverted(scores.scores.size());
    std::transform(scores.scores.begin(), scores.scores.end(), inverted.begin(),
                   [sweep](double s) { return sweep == Sweep::fixed_grid ? 1.0 - s : -s; });
    curve = trace_curve(inverted, mask, sweep);
    curve.flipped = !scores.flipped;
  }
  return curve;
}

std::vector<std::uint8_t> detection_mask(const ScoreVector &scores, double threshold) {
  std::vector<std::uint8_t> out(scores.scores.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = scores.scores[j] > threshold ? 1 : 0;
  return out;
}

std::vector<double> method_lambda_grid(const Matrix &Y, const Dictionary &R, Method method,
                                       std::size_t count) {
  if (method == Method::rpca_dagger) {
    const Matrix Yt = R.pinv() * Y;
    return lambda_grid(Yt, Matrix::Identity(R.size(), R.size()), count);
  }
  return lambda_grid(Y, R.matrix(), count);
}

LambdaSweepResult best_auc_over_lambda(const Matrix &Y, const Dictionary &R,
                                       const GroundTruthMask &mask,
                                       const std::vector<double> &grid, const ApgConfig &cfg,
                                       Method method, bool allow_flip, std::size_t jobs) {
  if (grid.empty())
    throw Error(ErrorKind::invalid_argument, "best_auc_over_lambda: empty lambda grid");
  if (method != Method::xpra && method != Method::rpca_dagger)
    throw Error(ErrorKind::invalid_argument, "best_auc_over_lambda: method must be a demixer");
  if (mask.labels.size() != std::size_t(Y.cols()))
    throw Error(ErrorKind::shape, "best_auc_over_lambda: mask length differs from data columns");

  LambdaSweepResult out;
  out.trials.resize(grid.size());
  std::mutex best_mutex;
  std::optional<std::size_t> best_index;

  auto run_trial = [&](std::size_t k) {
    LambdaTrial &trial = out.trials[k];
    trial.lambda = grid[k];
    try {
      ApgConfig c = cfg;
      c.lambda = grid[k];
      DemixResult res = method == Method::xpra ? demix(Y, R, c) : rpca_dagger(Y, R, c);
      RocCurve curve =
          roc(column_norm_scores(res.A_hat, method), mask, Sweep::score_values, allow_flip);
      trial.auc = curve.auc;
      std::lock_guard lock(best_mutex);
      // Total order (AUC desc, index asc) makes the pick independent of
      // completion order.
      const bool better = !best_index || curve.auc > out.curve.auc ||
                          (curve.auc == out.curve.auc && k < *best_index);
      if (better) {
        best_index = k;
        out.lambda = grid[k];
        out.curve = std::move(curve);
        out.demix = std::move(res);
      }
    } catch (const Error &e) {
      trial.error = std::string(to_string(e.kind())) + ": " + e.what();
      log_warning("lambda " + std::to_string(grid[k]) + " failed: " + trial.error);
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, grid.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < grid.size(); ++k)
      run_trial(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < grid.size(); k = next++)
          run_trial(k);
      });
  }

  if (!best_index)
    throw Error(ErrorKind::numerical, "best_auc_over_lambda: every lambda failed");
  return out;
}

std::vector<MethodRow> roc_table(const Matrix &Y, const Dictionary &R, const GroundTruthMask &mask,
                                 const TableOptions &opts) {
  std::vector<MethodRow> rows;
  for (Method m : {Method::xpra, Method::rpca_dagger}) {
    const auto grid = method_lambda_grid(Y, R, m, opts.lambda_count);
    const auto sweep = best_auc_over_lambda(Y, R, mask, grid, opts.cfg, m, opts.allow_flip, opts.jobs);
    rows.push_back({m, sweep.curve.best.threshold, sweep.curve.best.tpr, sweep.curve.best.fpr,
                    sweep.curve.auc, sweep.curve.flipped, sweep.lambda});
  }
  for (Method m : {Method::mf, Method::mf_dagger}) {
    const ScoreVector s = m == Method::mf ? matched_filter(Y, R) : matched_filter_dagger(Y, R);
    const RocCurve c = roc(s, mask, Sweep::fixed_grid, opts.allow_flip);
    rows.push_back({m, std::nullopt, c.best.tpr, c.best.fpr, c.auc, c.flipped, std::nullopt});
  }
  return rows;
}

nlohmann::json to_json(const RocCurve &curve) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v))
      return v;
    return nullptr;
  };
  nlohmann::json pts = nlohmann::json::array();
  for (const auto &p : curve.points)
    pts.push_back({{"threshold", num(p.threshold)}, {"tpr", p.tpr}, {"fpr", p.fpr}});
  return {{"auc", curve.auc},
          {"flipped", curve.flipped},
          {"best_point",
           {{"threshold", num(curve.best.threshold)},
            {"tpr", curve.best.tpr},
            {"fpr", curve.best.fpr}}},
          {"points", std::move(pts)}};
}

} // namespace xpra
