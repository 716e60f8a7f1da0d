#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "shrinklab/prior.hpp"
#include "shrinklab/risk.hpp"

namespace shrinklab {

// Σ_A = W Wᵀ and Σ_C = W D Wᵀ with D diagonal, d_i ∈ (0, 1]; reduces the
// regression problem to a heteroscedastic sequence in mu = W⁻¹β.
struct Rotation {
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_inv;
  Eigen::VectorXd d;
  bool degenerate = false;  // B = 0, D = I
};

// X | β ~ N_m(Aβ, I), Y | β ~ N_n(Bβ, I) with A of full column rank.
// Factorizations are computed once at construction and shared.
class LinearModel {
 public:
  LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b);

  int m() const { return static_cast<int>(a_.rows()); }
  int n() const { return static_cast<int>(b_.rows()); }
  int p() const { return static_cast<int>(a_.cols()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

  const Eigen::MatrixXd& sigma_a() const { return sigma_a_; }
  const Eigen::MatrixXd& sigma_c() const { return sigma_c_; }
  double log_det_ata() const { return log_det_ata_; }
  double log_det_c() const { return log_det_c_; }
  const Rotation& rotation() const { return rotation_; }

  struct Fit {
    Eigen::VectorXd beta_hat;
    double rss;
  };
  Fit least_squares(const Eigen::VectorXd& x) const;
  // joint fit over the stacked design (A; B)
  Fit least_squares(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd a_, b_;
  Eigen::MatrixXd ata_, c_;
  Eigen::MatrixXd sigma_a_, sigma_c_;
  double log_det_ata_ = 0.0, log_det_c_ = 0.0;
  Rotation rotation_;
};

// Cholesky of Σ_A followed by a symmetric eigendecomposition of the
// whitened Σ_C; W = L Q satisfies both factorizations by construction.
Rotation simultaneous_diagonalize(const LinearModel& model);

// log p̂_U(y|x) = −(n/2)log 2π + ½log|AᵀA| − ½log|AᵀA+BᵀB| − (RSS_{x,y} − RSS_x)/2
double logpdf_uniform_reg(const LinearModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y);

// log p̂_π(y|x) = log m(β̂_{x,y}; Σ_C) − log m(β̂_x; Σ_A) + log p̂_U(y|x).
// The prior acts on mu = W⁻¹β, where the covariances become I and D and
// the marginals reduce to the shared 1-D scale-mixture quadrature.
double logpdf_bayes_reg(const Prior& prior, const LinearModel& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double logpdf_bayes_reg(const Prior& prior, const LinearModel& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Rotation& rotation);

// Sign scan of trace{H(m(z; W V_w Wᵀ))[Σ_A − Σ_C]} (and the √m variant)
// over β-space points × a w-grid, with V_w = wI + (1−w)D.  In rotated
// coordinates the trace reduces to Σ_i (1−d_i) ∂²_i, evaluated by central
// finite differences.
struct TraceConditionReport {
  ConditionReport condition_m;
  ConditionReport condition_sqrt_m;
};
TraceConditionReport trace_condition_check(const Prior& prior,
                                           const LinearModel& model,
                                           std::span<const Eigen::VectorXd> points,
                                           std::span<const double> w_grid,
                                           double tol = 1e-9);

// R_KL(β, p̂_U) − R_KL(β, p̂_π) by the regression marginal representation:
// E log m(β̂_{x,y}; Σ_C) − E log m(β̂_x; Σ_A) with shared noise draws.
RiskEstimate kl_gap_reg_mc(const Prior& prior, const LinearModel& model,
                           const Eigen::VectorXd& beta, long replicates,
                           std::uint64_t seed);

struct RegressCurveConfig {
  std::vector<Prior> priors;
  Eigen::VectorXd beta_direction;
  std::vector<double> c_grid;
  long replicates = 100000;
  std::uint64_t seed = 0;
  int threads = 0;
};

std::vector<RiskCurveRow> regress_curve(const LinearModel& model,
                                        const RegressCurveConfig& config);

}  // namespace shrinklab
