#include "xpra/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "xpra/dict.hpp"
#include "xpra/error.hpp"

namespace xpra {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Matrix project_phi(const Matrix &Z, const Matrix &U, const Matrix &V) {
  if (U.cols() == 0)
    return Matrix::Zero(Z.rows(), Z.cols());
  const Matrix PuZ = U * (U.transpose() * Z);
  const Matrix ZV = Z * V;
  const Matrix ZPv = ZV * V.transpose();
  const Matrix PuZPv = U * ((U.transpose() * ZV) * V.transpose());
  return PuZ + ZPv - PuZPv;
}

OmegaRBasis omega_r_basis(const InstanceGeometry &geom) {
  std::map<Eigen::Index, std::vector<Eigen::Index>> by_column;
  for (const auto &e : geom.support)
    by_column[e.column].push_back(e.atom);

  OmegaRBasis basis;
  std::vector<Vector> vecs;
  for (const auto &[col, atoms] : by_column) {
    Matrix block(geom.R.rows(), atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k)
      block.col(k) = geom.R.col(atoms[k]);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const Vector &sigma = svd.singularValues();
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
      if (!(sigma(k) > kRankTolerance * sigma(0)))
        break;
      basis.column.push_back(col);
      vecs.push_back(svd.matrixU().col(k));
    }
  }
  basis.vectors.resize(geom.R.rows(), static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t k = 0; k < vecs.size(); ++k)
    basis.vectors.col(k) = vecs[k];
  return basis;
}

namespace {

// c -> B^T P_Phi(B c) for the orthonormal basis B of R * Omega. Works on
// the support columns only; P_Phi(Z) restricted to column j is
// P_U z_j + (I - P_U) (Z V) v_j where v_j is row j of V.
Vector gram_apply(const OmegaRBasis &basis, const InstanceGeometry &geom, const Vector &c) {
  const Matrix &U = geom.U;
  const Matrix &V = geom.V;
  const Eigen::Index dim = basis.vectors.cols();
  Matrix ZV = Matrix::Zero(U.rows(), U.cols());
  for (Eigen::Index k = 0; k < dim; ++k)
    ZV.noalias() += (c(k) * basis.vectors.col(k)) * V.row(basis.column[k]);
  const Matrix UtZV = U.transpose() * ZV;

  // Group coordinates sharing a column: z_j = sum of their vectors.
  Vector out(dim);
  Eigen::Index k = 0;
  while (k < dim) {
    Eigen::Index end = k;
    const Eigen::Index col = basis.column[k];
    Vector z = Vector::Zero(U.rows());
    while (end < dim && basis.column[end] == col) {
      z.noalias() += c(end) * basis.vectors.col(end);
      ++end;
    }
    const Vector vj = V.row(col).transpose();
    const Vector proj = U * (U.transpose() * z) + ZV * vj - U * (UtZV * vj);
    for (Eigen::Index q = k; q < end; ++q)
      out(q) = basis.vectors.col(q).dot(proj);
    k = end;
  }
  return out;
}

} // namespace

double compute_mu(const InstanceGeometry &geom, double tol) {
  if (geom.rank() == 0 || geom.support.empty())
    return 0.0;
  const OmegaRBasis basis = omega_r_basis(geom);
  const Eigen::Index dim = basis.vectors.cols();
  if (dim == 0)
    return 0.0;

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  Vector c(dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    c(k) = g(rng);
  c.normalize();

  constexpr int kMaxRounds = 10000;
  double previous = -1.0, current = 0.0;
  for (int round = 0; round < kMaxRounds; ++round) {
    Vector w = gram_apply(basis, geom, c);
    current = c.dot(w);
    const double wn = w.norm();
    if (!(wn > 0.0))
      return 0.0;
    if (round > 0 && std::abs(current - previous) <= tol * std::max(current, 1e-300))
      return std::sqrt(std::clamp(current, 0.0, 1.0));
    previous = current;
    c = w / wn;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "compute_mu: power iteration did not converge in " << kMaxRounds
      << " rounds (last estimates " << previous << ", " << current << ")";
  throw Error(ErrorKind::convergence, msg.str());
}

Gammas compute_gammas(const InstanceGeometry &geom) {
  Gammas out;
  for (Eigen::Index i = 0; i < geom.R.cols(); ++i) {
    const double rn2 = geom.R.col(i).squaredNorm();
    if (!(rn2 > 0.0))
      throw Error(ErrorKind::degenerate_input,
                  "compute_gammas: dictionary atom " + std::to_string(i) + " is zero");
    if (geom.rank() > 0)
      out.gamma_UR =
          std::max(out.gamma_UR, (geom.U.transpose() * geom.R.col(i)).squaredNorm() / rn2);
  }
  if (geom.rank() > 0)
    out.gamma_V = geom.V.rowwise().squaredNorm().maxCoeff();
  return out;
}

double compute_xi(const InstanceGeometry &geom) {
  if (geom.rank() == 0)
    return 0.0;
  const Matrix RtU = geom.R.transpose() * geom.U;
  return (RtU * geom.V.transpose()).cwiseAbs().maxCoeff();
}

LambdaBounds lambda_bounds(const BoundInputs &in) {
  if (in.s == 0)
    throw Error(ErrorKind::trivial_instance, "lambda_bounds: s = 0, nothing to bound");
  const double s = static_cast<double>(in.s);
  const double d = static_cast<double>(in.d);
  const double r = static_cast<double>(in.r);
  const double m = std::min(s, d);
  const double one_minus_mu = 1.0 - in.mu;

  LambdaBounds out;
  out.c = 0.5 * in.F_U * ((1.0 + 2.0 * in.gamma_UR) * (m + s * in.gamma_V) + 2.0 * s * in.gamma_V) -
          0.5 * in.F_L * (m + s * in.gamma_V);
  const double denom = in.F_L * one_minus_mu * one_minus_mu - out.c;
  out.C = denom != 0.0 ? out.c / denom : kInf;
  if (denom <= 0.0 || out.C >= 1.0)
    out.lambda_min = kInf;
  else
    out.lambda_min = (1.0 + out.C) / (1.0 - out.C) * in.xi;
  out.lambda_max = (std::sqrt(in.F_L) * one_minus_mu - std::sqrt(r * in.F_U) * in.mu) / std::sqrt(s);
  out.s_max = in.r == 0 ? kInf : 0.5 * one_minus_mu * one_minus_mu * double(in.nm) / r;
  out.a1 = std::isfinite(out.lambda_min) && out.lambda_max >= out.lambda_min;

  out.s_ok = s <= out.s_max;
  const double numer = one_minus_mu * one_minus_mu - 2.0 * s * in.gamma_V;
  if (s <= std::min(d, out.s_max))
    out.a2 = in.gamma_UR <= numer / (2.0 * s * (1.0 + in.gamma_V));
  else if (d < s && out.s_ok)
    out.a2 = in.gamma_UR <= numer / (2.0 * (d + s * in.gamma_V));
  else
    out.a2 = false;
  return out;
}

InstanceGeometry make_geometry(const Matrix &X0, const Matrix &A0, const Matrix &R,
                               double rank_tol) {
  if (X0.rows() != R.rows() || A0.rows() != R.cols() || A0.cols() != X0.cols())
    throw Error(ErrorKind::shape, "diagnose: inconsistent shapes of X0, A0 and R");
  InstanceGeometry geom;
  geom.R = R;
  geom.columns = X0.cols();

  Eigen::BDCSVD<Matrix> svd(X0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &sigma = svd.singularValues();
  Eigen::Index r = 0;
  if (sigma.size() > 0 && sigma(0) > 0.0)
    while (r < sigma.size() && sigma(r) > rank_tol * sigma(0))
      ++r;
  geom.U = svd.matrixU().leftCols(r);
  geom.V = svd.matrixV().leftCols(r);

  for (Eigen::Index j = 0; j < A0.cols(); ++j)
    for (Eigen::Index i = 0; i < A0.rows(); ++i)
      if (A0(i, j) != 0.0)
        geom.support.push_back({i, j});
  return geom;
}

GuaranteeReport diagnose(const Matrix &X0, const Matrix &A0, const Matrix &R, double rank_tol) {
  if (R.cols() > R.rows())
    throw Error(ErrorKind::thin_violation,
                "diagnose: guarantees are defined for thin dictionaries (d <= f) only");
  const InstanceGeometry geom = make_geometry(X0, A0, R, rank_tol);
  const FrameBounds frame = frame_bounds(R);
  const Gammas gam = compute_gammas(geom);

  GuaranteeReport rep;
  rep.mu = compute_mu(geom);
  rep.gamma_UR = gam.gamma_UR;
  rep.gamma_V = gam.gamma_V;
  rep.xi = compute_xi(geom);
  rep.F_L = frame.lower;
  rep.F_U = frame.upper;
  rep.s = geom.support.size();
  rep.r = static_cast<std::size_t>(geom.rank());
  rep.d = static_cast<std::size_t>(R.cols());
  rep.f = static_cast<std::size_t>(R.rows());
  rep.nm = static_cast<std::size_t>(X0.cols());

  const LambdaBounds lb = lambda_bounds({rep.mu, rep.gamma_UR, rep.gamma_V, rep.xi, rep.F_L,
                                         rep.F_U, rep.s, rep.r, rep.d, rep.nm});
  rep.s_max = lb.s_max;
  rep.C = lb.C;
  rep.lambda_min = lb.lambda_min;
  rep.lambda_max = lb.lambda_max;
  rep.a1_holds = lb.a1;
  rep.a2_holds = lb.a2;
  rep.s_ok = lb.s_ok;
  return rep;
}

nlohmann::json to_json(const GuaranteeReport &r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v))
      return v;
    return nullptr;
  };
  return {{"mu", num(r.mu)},
          {"gamma_UR", num(r.gamma_UR)},
          {"gamma_V", num(r.gamma_V)},
          {"xi", num(r.xi)},
          {"F_L", num(r.F_L)},
          {"F_U", num(r.F_U)},
          {"s", r.s},
          {"r", r.r},
          {"d", r.d},
          {"f", r.f},
          {"nm", r.nm},
          {"s_max", num(r.s_max)},
          {"C", num(r.C)},
          {"lambda_min", num(r.lambda_min)},
          {"lambda_max", num(r.lambda_max)},
          {"a1_holds", r.a1_holds},
          {"a2_holds", r.a2_holds},
          {"s_ok", r.s_ok}};
}

} // namespace xpra
