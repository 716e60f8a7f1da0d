#pragma once

#include <Eigen/Core>

#include "shrinklab/prior.hpp"

namespace shrinklab {

// Pointwise evaluation of the prior marginal m(z; v) of Z ~ N_p(mu, v I):
// value, score, and the two Laplacian ratios driving the risk identities.
// laplacian_sqrt_m_over_sqrt_m = laplacian_m_over_m/2 − |grad_log_m|²/4.
struct MarginalEval {
  double log_m;
  Eigen::VectorXd grad_log_m;
  double laplacian_m_over_m;
  double laplacian_sqrt_m_over_sqrt_m;
};

double marginal_log_density(const Prior& prior, const Eigen::VectorXd& z,
                            double v);

MarginalEval marginal_eval(const Prior& prior, const Eigen::VectorXd& z,
                           double v);

// Posterior probabilities p(B_i | z) ∝ w_i·m_i(z; v), normalized to sum 1.
Eigen::VectorXd mixture_weights(const MixturePrior& prior,
                                const Eigen::VectorXd& z, double v);

// Marginal of Z ~ N_p(mu, diag(v)) under the same prior families, evaluated
// by the shared 1-D scale-mixture quadrature.  Used by the regression
// module in rotated coordinates; recentered and mixture priors are not
// supported here.
double marginal_log_density_diag(const Prior& prior, const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& v_diag);

namespace detail {

// Moment ratios of a spherically symmetric scale-mixture marginal in
// effective dimension k at squared radius r2:
//   m  = ∫ N_k(r; 0, σ²(s) I) dG(s)      with σ²(s) = v + s·scale
//   m1 = ∫ σ⁻² N dG / m,   m2 = ∫ σ⁻⁴ N dG / m
// so that grad log m = −z·m1 and ∇²m/m = r²·m2 − k·m1.
struct RadialMoments {
  double log_m;
  double m1;
  double m2;
};

RadialMoments normal_radial_moments(int k, double r2, double v, double nu);
// incomplete-gamma closed form, with a series branch for r²/(2v) < 1e-8
RadialMoments harmonic_radial_moments(int k, double r2, double v,
                                      bool derivs = true);
// generic mixing weight (1+s)^{mix_a − 2} ds with scale v0; mix_a = 2
// reproduces the harmonic marginal by quadrature (cross-check path)
RadialMoments scale_mixture_radial_moments(int k, double r2, double v,
                                           double mix_a, double v0,
                                           bool derivs = true);

}  // namespace detail

}  // namespace shrinklab
