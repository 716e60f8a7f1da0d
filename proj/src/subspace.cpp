#include "shrinklab/subspace.hpp"

#include <stdexcept>

#include <Eigen/QR>

#include "shrinklab/util.hpp"

namespace shrinklab {

Subspace::Subspace(Eigen::VectorXd offset, Eigen::MatrixXd basis)
    : offset_(std::move(offset)), basis_(std::move(basis)) {
  const Eigen::Index p = offset_.size();
  if (p < 1) throw std::invalid_argument("Subspace: empty offset");
  if (basis_.size() > 0 && basis_.rows() != p)
    throw std::invalid_argument("Subspace: basis rows must match offset length");
  const Eigen::Index d = basis_.cols();
  if (d >= p)
    throw std::invalid_argument("Subspace: dimension must be < ambient dimension");
  if (d > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_);
    qr.setThreshold(1e-10);
    if (qr.rank() < d)
      throw std::invalid_argument("Subspace: basis columns are rank deficient");
    basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(p, d);
    const double ortho_err =
        (basis_.transpose() * basis_ - Eigen::MatrixXd::Identity(d, d))
            .cwiseAbs()
            .maxCoeff();
    if (ortho_err > 1e-10)
      throw std::runtime_error("Subspace: re-orthonormalization failed");
  } else {
    basis_.resize(p, 0);
  }
}

Subspace Subspace::point(Eigen::VectorXd b) {
  const Eigen::Index p = b.size();
  return Subspace(std::move(b), Eigen::MatrixXd(p, 0));
}

Subspace Subspace::span_of_ones(int p) {
  if (p < 2) throw std::invalid_argument("span_of_ones: needs p >= 2");
  Eigen::MatrixXd basis = Eigen::MatrixXd::Constant(p, 1, 1.0 / std::sqrt(p));
  return Subspace(Eigen::VectorXd::Zero(p), std::move(basis));
}

Eigen::VectorXd Subspace::project(const Eigen::VectorXd& z) const {
  check_dim(z, offset_.size(), "Subspace::project");
  if (dim() == 0) return offset_;
  return offset_ + basis_ * (basis_.transpose() * (z - offset_));
}

Eigen::VectorXd Subspace::residual(const Eigen::VectorXd& z) const {
  return z - project(z);
}

}  // namespace shrinklab
