#include "xpra/prox.hpp"

#include <cmath>
#include <sstream>

#include "xpra/error.hpp"

namespace xpra {

Matrix soft_threshold(const Matrix &M, double tau) {
  if (!(tau >= 0.0))
    throw Error(ErrorKind::invalid_argument, "soft_threshold: tau must be >= 0");
  return M.unaryExpr([tau](double m) {
    const double mag = std::abs(m) - tau;
    return mag > 0.0 ? std::copysign(mag, m) : 0.0;
  });
}

namespace {

// Wide matrices are decomposed through their transpose so the SVD always
// runs on a tall input.
template <class Svd> void check_svd(const Svd &svd, const Matrix &M) {
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "SVD failed to converge on " << M.rows() << "x" << M.cols()
        << " matrix (frobenius " << M.norm() << ", max-abs "
        << (M.size() ? M.cwiseAbs().maxCoeff() : 0.0) << ")";
    throw Error(ErrorKind::numerical, msg.str());
  }
}

} // namespace

SvtResult svt_with_spectrum(const Matrix &M, double tau) {
  if (!(tau >= 0.0))
    throw Error(ErrorKind::invalid_argument, "svt: tau must be >= 0");
  if (!M.allFinite())
    throw Error(ErrorKind::numerical, "svt: input has non-finite entries");
  if (M.size() == 0)
    return {M, Vector()};

  const bool wide = M.cols() > M.rows();
  Eigen::BDCSVD<Matrix> svd;
  if (wide)
    svd.compute(M.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  else
    svd.compute(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  check_svd(svd, M);

  const Vector &sigma = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < sigma.size() && sigma(keep) > tau)
    ++keep;
  Vector shrunk = (sigma.head(keep).array() - tau).matrix();

  Matrix value;
  const auto U = svd.matrixU().leftCols(keep);
  const auto V = svd.matrixV().leftCols(keep);
  if (wide)
    value = V * shrunk.asDiagonal() * U.transpose();
  else
    value = U * shrunk.asDiagonal() * V.transpose();
  if (keep == 0)
    value = Matrix::Zero(M.rows(), M.cols());
  return {std::move(value), std::move(shrunk)};
}

double spectral_norm(const Matrix &M) {
  if (M.size() == 0)
    return 0.0;
  Eigen::BDCSVD<Matrix> svd(M.cols() > M.rows() ? Matrix(M.transpose()) : M);
  check_svd(svd, M);
  return svd.singularValues()(0);
}

} // namespace xpra
