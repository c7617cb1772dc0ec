#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "xpra/hsio.hpp"

namespace xpra {

/// Nonzero position (atom, column) of the sparse coefficient matrix.
struct SupportEntry {
  Eigen::Index atom = 0;
  Eigen::Index column = 0;
};

/// Subspaces of a recovery instance: singular vectors of the low-rank part,
/// support of the coefficients, and the dictionary.
struct InstanceGeometry {
  Matrix U; ///< f x r, orthonormal columns
  Matrix V; ///< nm x r, orthonormal columns
  std::vector<SupportEntry> support;
  Matrix R; ///< f x d
  Eigen::Index columns = 0; ///< nm

  Eigen::Index rank() const { return U.cols(); }
};

/// P_U Z + Z P_V - P_U Z P_V
Matrix project_phi(const Matrix &Z, const Matrix &U, const Matrix &V);

/// Orthonormal basis of the image R * Omega: one block per support column,
/// spanning the atoms used in that column. Each basis element is stored as
/// (column index, f-vector).
struct OmegaRBasis {
  std::vector<Eigen::Index> column;
  Matrix vectors; ///< f x dim
};
OmegaRBasis omega_r_basis(const InstanceGeometry &geom);

/// Largest fraction ||P_Phi(Z)||_F / ||Z||_F over nonzero Z in R * Omega,
/// by power iteration in the coordinates of omega_r_basis.
double compute_mu(const InstanceGeometry &geom, double tol = 1e-13);

struct Gammas {
  double gamma_UR = 0.0;
  double gamma_V = 0.0;
};
Gammas compute_gammas(const InstanceGeometry &geom);

/// max |(R^T U V^T)_ij|
double compute_xi(const InstanceGeometry &geom);

struct BoundInputs {
  double mu = 0.0;
  double gamma_UR = 0.0;
  double gamma_V = 0.0;
  double xi = 0.0;
  double F_L = 1.0;
  double F_U = 1.0;
  std::size_t s = 0;
  std::size_t r = 0;
  std::size_t d = 0;
  std::size_t nm = 0;
};

struct LambdaBounds {
  double c = 0.0;
  double C = 0.0;
  double lambda_min = 0.0; ///< +inf when C is undefined or >= 1
  double lambda_max = 0.0;
  double s_max = 0.0; ///< +inf when r = 0
  bool a1 = false;
  bool a2 = false;
  bool s_ok = false;
};

/// Admissible lambda interval and the two sufficient conditions.
/// Throws Error{trivial_instance} when s = 0.
LambdaBounds lambda_bounds(const BoundInputs &in);

struct GuaranteeReport {
  double mu = 0.0;
  double gamma_UR = 0.0;
  double gamma_V = 0.0;
  double xi = 0.0;
  double F_L = 0.0;
  double F_U = 0.0;
  std::size_t s = 0, r = 0, d = 0, f = 0, nm = 0;
  double s_max = 0.0;
  double C = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool a1_holds = false;
  bool a2_holds = false;
  bool s_ok = false;

  /// All sufficient conditions hold, so any lambda in
  /// [lambda_min, lambda_max] recovers the instance.
  bool certified() const { return a1_holds && a2_holds && s_ok; }
  double midpoint_lambda() const { return 0.5 * (lambda_min + lambda_max); }
};

/// Geometry of (X0, A0, R): singular vectors of X0 above rank_tol * sigma_max
/// and the exact nonzero pattern of A0.
InstanceGeometry make_geometry(const Matrix &X0, const Matrix &A0, const Matrix &R,
                               double rank_tol = 1e-8);

/// Full incoherence report. Requires a thin dictionary (d <= f).
GuaranteeReport diagnose(const Matrix &X0, const Matrix &A0, const Matrix &R,
                         double rank_tol = 1e-8);

/// Non-finite values are written as JSON null.
nlohmann::json to_json(const GuaranteeReport &report);

} // namespace xpra
