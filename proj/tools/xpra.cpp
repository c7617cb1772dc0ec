// Command-line front end: synth, dict, demix, diagnose, detect, roc-table.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xpra/detect.hpp"
#include "xpra/dict.hpp"
#include "xpra/error.hpp"
#include "xpra/guarantees.hpp"
#include "xpra/hsio.hpp"
#include "xpra/log.hpp"
#include "xpra/manifest.hpp"
#include "xpra/solver.hpp"
#include "xpra/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xpra;

namespace {

struct Common {
  std::string out_prefix = "xpra_";
  std::string format = "csv";
  bool verbose = false;
};

struct ApgFlags {
  double lambda = -1.0;
  std::size_t lambda_grid = 0;
  double v = 0.95;
  double nu_init = 0.0;
  double nu_floor = 1e-4;
  std::size_t max_iters = 500;
  double rel_tol = 1e-6;

  ApgConfig config() const {
    ApgConfig c;
    c.continuation = v;
    c.nu_init = nu_init;
    c.nu_floor = nu_floor;
    c.max_iters = max_iters;
    c.rel_tol = rel_tol;
    c.lambda = lambda > 0.0 ? lambda : 0.0;
    return c;
  }
  json to_json() const {
    return {{"lambda", lambda},     {"lambda_grid", lambda_grid}, {"v", v},
            {"nu_init", nu_init},   {"nu_floor", nu_floor},       {"max_iters", max_iters},
            {"rel_tol", rel_tol}};
  }
};

void add_apg_flags(CLI::App *cmd, ApgFlags &a) {
  cmd->add_option("--lambda", a.lambda, "Sparsity weight (overrides --lambda-grid)");
  cmd->add_option("--lambda-grid", a.lambda_grid, "Number of lambdas in (0, ||R^T Y||_inf/||Y||]");
  cmd->add_option("--v", a.v, "Continuation factor in (0,1)")->capture_default_str();
  cmd->add_option("--nu-init", a.nu_init, "Initial smoothing weight (default ||Y||)");
  cmd->add_option("--nu-floor", a.nu_floor, "Final smoothing weight")->capture_default_str();
  cmd->add_option("--max-iters", a.max_iters, "Inner iterations per stage")->capture_default_str();
  cmd->add_option("--rel-tol", a.rel_tol, "Relative iterate-change tolerance")->capture_default_str();
}

fs::path output_path(const Common &c, const std::string &name) {
  fs::path p(c.out_prefix + name);
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  return p;
}

void write_matrix(const Common &c, RunManifest &manifest, const Matrix &m, const std::string &name) {
  if (c.format == "f32") {
    const fs::path stem = output_path(c, name);
    write_f32_matrix(m, stem);
    manifest.add_output(fs::path(stem).replace_extension(".json"));
    manifest.add_output(fs::path(stem).replace_extension(".f32"));
  } else {
    const fs::path p = output_path(c, name + ".csv");
    write_csv_matrix(m, p);
    manifest.add_output(p);
  }
}

void write_json(const Common &c, RunManifest &manifest, const json &j, const std::string &name) {
  const fs::path p = output_path(c, name);
  std::ofstream out(p);
  if (!out)
    throw Error(ErrorKind::io, "cannot write " + p.string());
  out << j.dump(2) << '\n';
  manifest.add_output(p);
}

void finish(const Common &c, RunManifest &manifest) {
  manifest.write(output_path(c, "manifest.json"));
}

// Data and dictionary, optionally jointly normalized by max|Y|.
struct Inputs {
  Matrix Y;
  Dictionary R;
};

Inputs load_inputs(const std::string &data, const std::string &dict, bool normalize,
                   RunManifest &manifest) {
  Matrix Y = load_data_matrix(data);
  Matrix R = load_data_matrix(dict);
  manifest.add_input(data);
  manifest.add_input(dict);
  if (R.rows() != Y.rows())
    throw Error(ErrorKind::shape, "dictionary has " + std::to_string(R.rows()) +
                                      " rows but data has " + std::to_string(Y.rows()));
  if (normalize) {
    auto n = normalize_joint(Y, R);
    Y = std::move(n.data);
    R = std::move(n.dictionary);
  }
  return {std::move(Y), Dictionary(R)};
}

json demix_report(const DemixResult &r) {
  return {{"lambda", r.lambda_used},
          {"iterations", r.iterations},
          {"stages", r.stage_nu.size()},
          {"converged", r.converged},
          {"relative_residual", r.relative_residual},
          {"final_objective", r.objective_trace.empty() ? 0.0 : r.objective_trace.back()}};
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Low-rank plus dictionary-sparse demixing and target detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Common common;
  app.add_option("--out-prefix", common.out_prefix, "Prefix for every output file")
      ->capture_default_str();
  app.add_option("--format", common.format, "Matrix output format")
      ->check(CLI::IsMember({"csv", "f32"}))
      ->capture_default_str();
  app.add_flag("--verbose", common.verbose, "Log progress to stderr");

  // synth
  auto *synth = app.add_subcommand("synth", "Generate a synthetic Y = X0 + R A0 instance");
  SynthSpec spec;
  std::string kind = "gaussian";
  bool emit_mask = false;
  synth->add_option("--f", spec.f, "Bands")->required();
  synth->add_option("--nm", spec.nm, "Voxels")->required();
  synth->add_option("--r", spec.r, "Rank of X0")->required();
  synth->add_option("--d", spec.d, "Atoms")->required();
  synth->add_option("--s", spec.s, "Nonzeros of A0")->required();
  synth->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
  synth->add_option("--kind", kind, "Dictionary kind")
      ->check(CLI::IsMember({"gaussian", "orthonormal"}))
      ->capture_default_str();
  synth->add_option("--low", spec.magnitude_low, "Smallest |A0| entry")->capture_default_str();
  synth->add_option("--high", spec.magnitude_high, "Largest |A0| entry")->capture_default_str();
  synth->add_flag("--emit-mask", emit_mask, "Also write the voxel mask of A0's support columns");

  // dict
  auto *dict = app.add_subcommand("dict", "Build a dictionary from positive-class voxels");
  std::string dict_data, dict_mask, dict_mode = "sample";
  int positive_class = 16;
  LearnOptions learn;
  std::size_t atoms = 15;
  std::uint64_t dict_seed = 0;
  dict->add_option("--data", dict_data, "Cube header (.json/.f32) or CSV matrix")->required();
  dict->add_option("--mask", dict_mask, "Class-label CSV in unfolding order")->required();
  dict->add_option("--positive-class", positive_class)->capture_default_str();
  dict->add_option("--mode", dict_mode)->check(CLI::IsMember({"sample", "learn"}))->capture_default_str();
  dict->add_option("--d", atoms, "Number of atoms")->capture_default_str();
  dict->add_option("--seed", dict_seed)->capture_default_str();
  dict->add_option("--rho", learn.rho, "Sparse-coding penalty (learn mode)")->capture_default_str();
  dict->add_option("--iters", learn.iters, "Outer rounds (learn mode)")->capture_default_str();

  // demix
  auto *dmx = app.add_subcommand("demix", "Split Y into low-rank X and dictionary-sparse R A");
  std::string data_path, dict_path, method_name = "xpra";
  bool normalize = false;
  std::size_t jobs = 1;
  ApgFlags apg;
  dmx->add_option("--data", data_path)->required();
  dmx->add_option("--dict", dict_path)->required();
  dmx->add_option("--method", method_name)->check(CLI::IsMember({"xpra", "rpca-dagger"}))->capture_default_str();
  dmx->add_flag("--normalize", normalize, "Divide Y and R by max|Y| first");
  add_apg_flags(dmx, apg);

  // diagnose
  auto *diag = app.add_subcommand("diagnose", "Incoherence report and admissible lambda range");
  std::string x0_path, a0_path, r_path;
  double rank_tol = 1e-8;
  diag->add_option("--x0", x0_path)->required();
  diag->add_option("--a0", a0_path)->required();
  diag->add_option("--dict", r_path)->required();
  diag->add_option("--rank-tol", rank_tol)->capture_default_str();

  // detect
  auto *det = app.add_subcommand("detect", "Score voxels and trace the ROC curve");
  std::string mask_path;
  bool allow_flip = false;
  std::string emit_detections;
  det->add_option("--data", data_path)->required();
  det->add_option("--dict", dict_path)->required();
  det->add_option("--mask", mask_path)->required();
  det->add_option("--positive-class", positive_class)->capture_default_str();
  det->add_option("--method", method_name)
      ->check(CLI::IsMember({"xpra", "rpca-dagger", "mf", "mf-dagger"}))
      ->capture_default_str();
  det->add_flag("--allow-flip", allow_flip, "Invert scores when AUC < 0.5");
  det->add_flag("--emit-mask", emit_mask, "Write detections at the best operating point");
  det->add_flag("--normalize", normalize, "Divide Y and R by max|Y| first");
  det->add_option("--jobs", jobs, "Parallel lambda trials")->capture_default_str();
  add_apg_flags(det, apg);

  // roc-table
  auto *tbl = app.add_subcommand("roc-table", "Method, Threshold, TPR, FPR, AUC for all methods");
  bool no_flip = false;
  tbl->add_option("--data", data_path)->required();
  tbl->add_option("--dict", dict_path)->required();
  tbl->add_option("--mask", mask_path)->required();
  tbl->add_option("--positive-class", positive_class)->capture_default_str();
  tbl->add_flag("--no-flip", no_flip, "Never invert classifier output");
  tbl->add_flag("--normalize", normalize, "Divide Y and R by max|Y| first");
  tbl->add_option("--jobs", jobs, "Parallel lambda trials")->capture_default_str();
  add_apg_flags(tbl, apg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::string msg = e.what();
    for (char &ch : msg)
      if (ch == '\n')
        ch = ' ';
    std::cerr << "error: usage: " << msg << '\n';
    return 2;
  }
  set_log_level(common.verbose ? LogLevel::info : LogLevel::warning);

  const std::string sub = app.get_subcommands().front()->get_name();
  RunManifest manifest(sub);
  try {
    if (sub == "synth") {
      spec.kind = kind == "orthonormal" ? DictionaryKind::orthonormal_columns
                                        : DictionaryKind::gaussian_normalized;
      manifest.set_seed(spec.seed);
      manifest.set_flags({{"f", spec.f}, {"nm", spec.nm}, {"r", spec.r}, {"d", spec.d},
                          {"s", spec.s}, {"kind", kind}, {"low", spec.magnitude_low},
                          {"high", spec.magnitude_high}, {"format", common.format}});
      const SynthInstance inst = generate(spec);
      write_matrix(common, manifest, inst.Y, "Y");
      write_matrix(common, manifest, inst.X0, "X0");
      write_matrix(common, manifest, inst.A0, "A0");
      write_matrix(common, manifest, inst.R, "R");
      json rep = inst.report ? to_json(*inst.report) : json(nullptr);
      write_json(common, manifest, {{"seed_used", inst.seed_used}, {"report", rep}}, "report.json");
      if (emit_mask) {
        std::vector<std::uint8_t> labels(inst.A0.cols());
        for (Eigen::Index j = 0; j < inst.A0.cols(); ++j)
          labels[j] = inst.A0.col(j).cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
        const fs::path p = output_path(common, "mask.csv");
        write_mask_csv(labels, p);
        manifest.add_output(p);
      }
    } else if (sub == "dict") {
      manifest.set_seed(dict_seed);
      manifest.set_flags({{"mode", dict_mode}, {"d", atoms}, {"rho", learn.rho},
                          {"iters", learn.iters}, {"positive_class", positive_class}});
      const Matrix Y = load_data_matrix(dict_data);
      manifest.add_input(dict_data);
      const GroundTruthMask mask = read_mask_csv(dict_mask, positive_class);
      manifest.add_input(dict_mask);
      if (mask.labels.size() != std::size_t(Y.cols()))
        throw Error(ErrorKind::shape, "mask length differs from voxel count");
      json info = {{"mode", dict_mode}};
      Dictionary D;
      if (dict_mode == "sample") {
        info["voxel_indices"] = sample_atom_indices(mask, atoms, dict_seed);
        D = sample_dictionary(Y, mask, atoms, dict_seed);
      } else {
        learn.atoms = atoms;
        learn.seed = dict_seed;
        LearnResult res = learn_dictionary(positive_columns(Y, mask), learn);
        info["objective"] = res.objective;
        info["reseeded_atoms"] = res.reseeded_atoms;
        D = std::move(res.dictionary);
      }
      info["F_L"] = D.frame().lower;
      info["F_U"] = D.frame().upper;
      info["full_column_rank"] = D.has_pinv();
      write_matrix(common, manifest, D.matrix(), "R");
      write_json(common, manifest, info, "dict.json");
    } else if (sub == "demix") {
      manifest.set_flags({{"method", method_name}, {"normalize", normalize}, {"apg", apg.to_json()}});
      const Inputs in = load_inputs(data_path, dict_path, normalize, manifest);
      const Method method = parse_method(method_name);
      std::vector<double> lambdas;
      if (apg.lambda > 0.0)
        lambdas = {apg.lambda};
      else if (apg.lambda_grid > 0)
        lambdas = method_lambda_grid(in.Y, in.R, method, apg.lambda_grid);
      else
        throw Error(ErrorKind::invalid_argument, "demix needs --lambda or --lambda-grid");
      json runs = json::array();
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        ApgConfig cfg = apg.config();
        cfg.lambda = lambdas[k];
        const DemixResult res =
            method == Method::xpra ? demix(in.Y, in.R, cfg) : rpca_dagger(in.Y, in.R, cfg);
        const std::string suffix = lambdas.size() > 1 ? "_l" + std::to_string(k) : "";
        write_matrix(common, manifest, res.X_hat, "Xhat" + suffix);
        write_matrix(common, manifest, res.A_hat, "Ahat" + suffix);
        runs.push_back(demix_report(res));
      }
      write_json(common, manifest, {{"method", method_name}, {"runs", runs}}, "convergence.json");
    } else if (sub == "diagnose") {
      manifest.set_flags({{"rank_tol", rank_tol}});
      const Matrix X0 = load_data_matrix(x0_path), A0 = load_data_matrix(a0_path),
                   R = load_data_matrix(r_path);
      manifest.add_input(x0_path);
      manifest.add_input(a0_path);
      manifest.add_input(r_path);
      const json rep = to_json(diagnose(X0, A0, R, rank_tol));
      write_json(common, manifest, rep, "report.json");
      std::cout << rep.dump(2) << '\n';
    } else if (sub == "detect") {
      manifest.set_flags({{"method", method_name}, {"allow_flip", allow_flip},
                          {"positive_class", positive_class}, {"normalize", normalize},
                          {"jobs", jobs}, {"apg", apg.to_json()}});
      const Inputs in = load_inputs(data_path, dict_path, normalize, manifest);
      const GroundTruthMask mask = read_mask_csv(mask_path, positive_class);
      manifest.add_input(mask_path);
      const Method method = parse_method(method_name);
      json out;
      ScoreVector scores;
      RocCurve curve;
      if (method == Method::mf || method == Method::mf_dagger) {
        scores = method == Method::mf ? matched_filter(in.Y, in.R) : matched_filter_dagger(in.Y, in.R);
        curve = roc(scores, mask, Sweep::fixed_grid, allow_flip);
        out = to_json(curve);
      } else {
        std::vector<double> grid;
        if (apg.lambda > 0.0)
          grid = {apg.lambda};
        else
          grid = method_lambda_grid(in.Y, in.R, method, apg.lambda_grid ? apg.lambda_grid : 100);
        LambdaSweepResult sweep =
            best_auc_over_lambda(in.Y, in.R, mask, grid, apg.config(), method, allow_flip, jobs);
        scores = column_norm_scores(sweep.demix.A_hat, method);
        curve = sweep.curve;
        out = to_json(curve);
        out["lambda"] = sweep.lambda;
        json trials = json::array();
        for (const auto &t : sweep.trials)
          trials.push_back({{"lambda", t.lambda},
                            {"auc", t.auc ? json(*t.auc) : json(nullptr)},
                            {"error", t.error}});
        out["lambda_trials"] = trials;
      }
      out["method"] = to_string(method);
      write_json(common, manifest, out, "roc.json");
      const fs::path csv = output_path(common, "roc.csv");
      std::ofstream c(csv);
      c << "threshold,TPR,FPR\n";
      for (const auto &p : curve.points)
        c << fmt(p.threshold) << ',' << fmt(p.tpr) << ',' << fmt(p.fpr) << '\n';
      manifest.add_output(csv);
      if (emit_mask) {
        if (curve.flipped)
          for (double &s : scores.scores)
            s = (method == Method::mf || method == Method::mf_dagger) ? 1.0 - s : -s;
        const fs::path p = output_path(common, "detections.csv");
        write_mask_csv(detection_mask(scores, curve.best.threshold), p);
        manifest.add_output(p);
      }
    } else if (sub == "roc-table") {
      manifest.set_flags({{"allow_flip", !no_flip}, {"positive_class", positive_class},
                          {"normalize", normalize}, {"jobs", jobs}, {"apg", apg.to_json()}});
      const Inputs in = load_inputs(data_path, dict_path, normalize, manifest);
      const GroundTruthMask mask = read_mask_csv(mask_path, positive_class);
      manifest.add_input(mask_path);
      TableOptions opts;
      opts.lambda_count = apg.lambda_grid ? apg.lambda_grid : 100;
      opts.cfg = apg.config();
      opts.allow_flip = !no_flip;
      opts.jobs = jobs;
      const auto rows = roc_table(in.Y, in.R, mask, opts);
      const fs::path csv = output_path(common, "table.csv");
      std::ofstream c(csv);
      c << "Method,Threshold,TPR,FPR,AUC\n";
      for (const auto &r : rows)
        c << to_string(r.method) << (r.flipped ? "*" : "") << ','
          << (r.threshold ? fmt(*r.threshold) : std::string("N/A")) << ',' << fmt(r.tpr) << ','
          << fmt(r.fpr) << ',' << fmt(r.auc) << '\n';
      manifest.add_output(csv);
    }
    finish(common, manifest);
  } catch (const Error &e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
