#pragma once

#include <Eigen/Core>

namespace shrinklab {

// Affine subspace B = { offset + basis·t } of R^p with orthonormal basis
// columns; d = 0 encodes a single point.  The basis is re-orthonormalized
// through a QR factorization at construction, so the projection
// P_B z = offset + Q Qᵀ (z − offset) is exact and idempotent.
class Subspace {
 public:
  Subspace(Eigen::VectorXd offset, Eigen::MatrixXd basis);

  static Subspace point(Eigen::VectorXd b);
  // span{1_p}, the equal-coordinates line through the origin
  static Subspace span_of_ones(int p);

  int ambient_dim() const { return static_cast<int>(offset_.size()); }
  int dim() const { return static_cast<int>(basis_.cols()); }

  const Eigen::VectorXd& offset() const { return offset_; }
  const Eigen::MatrixXd& basis() const { return basis_; }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
  // z − P_B z
  Eigen::VectorXd residual(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd offset_;
  Eigen::MatrixXd basis_;  // p×d, orthonormal columns
};

}  // namespace shrinklab
