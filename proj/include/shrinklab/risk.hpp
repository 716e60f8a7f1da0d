#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shrinklab/mean_estimators.hpp"
#include "shrinklab/model.hpp"
#include "shrinklab/predictive.hpp"
#include "shrinklab/prior.hpp"

namespace shrinklab {

struct RiskEstimate {
  double mean;
  double std_error;  // sample SD / sqrt(replicates)
  long replicates;
  std::uint64_t seed;
};

// MC estimate of the KL loss ∫ p(y|mu) log[p(y|mu)/p̂(y|x)] dy for a
// density already bound to its conditioning point, sampling Y ~ N(mu, v_y I).
RiskEstimate kl_loss_mc(const ModelConfig& model, const Eigen::VectorXd& mu,
                        const PredictiveDensity& density, long replicates,
                        std::uint64_t seed);

// MC estimate of R_KL(mu, p̂) over X ~ N(mu, v_x I), Y ~ N(mu, v_y I); the
// sweep version reuses the same draws for every estimator (common random
// numbers).
std::vector<RiskEstimate> kl_risk_mc_sweep(
    const ModelConfig& model, const Eigen::VectorXd& mu,
    std::span<const PredictiveEstimator> estimators, long replicates,
    std::uint64_t seed);
RiskEstimate kl_risk_mc(const ModelConfig& model, const Eigen::VectorXd& mu,
                        const PredictiveEstimator& estimator, long replicates,
                        std::uint64_t seed);

// R_KL(mu, p̂_U) − R_KL(mu, p̂_prior) through the marginal representation:
// E log m(W; v_w) − E log m(X; v_x) with W and X sharing the same standard
// normal draw.
RiskEstimate kl_gap_via_marginals(const Prior& prior, const ModelConfig& model,
                                  const Eigen::VectorXd& mu, long replicates,
                                  std::uint64_t seed);

std::vector<RiskEstimate> quadratic_risk_mc_sweep(
    std::span<const MeanEstimator> estimators, const Eigen::VectorXd& mu,
    double v, long replicates, std::uint64_t seed);
RiskEstimate quadratic_risk_mc(const MeanEstimator& est,
                               const Eigen::VectorXd& mu, double v,
                               long replicates, std::uint64_t seed);

// Importance-sampling estimate of ∫ p̂(y|x) dy with proposal p̂_U(y|x);
// equals 1 for every bona fide predictive density.
RiskEstimate predictive_mass_mc(const PredictiveDensity& density,
                                long replicates, std::uint64_t seed);

// Both sides of the risk-difference identity
//   R_KL gap = ½ ∫_{v_w}^{v_x} v⁻² [R_Q gap]_v dv,
// lhs by the marginal representation, rhs by averaging the pointwise
// unbiased bracket over X ~ N(mu, v I) and Gauss-Legendre in v, sharing one
// normal draw per replicate across both pipelines.
struct IdentityCheck {
  RiskEstimate lhs;
  RiskEstimate rhs;
};
IdentityCheck risk_identity_check(const Prior& prior, const ModelConfig& model,
                                  const Eigen::VectorXd& mu, int v_nodes,
                                  long replicates, std::uint64_t seed);

struct ConditionReport {
  bool pass = true;
  double worst = 0.0;  // max over the scan of the (sign) condition value
  Eigen::VectorXd witness;
  double witness_v = 0.0;
};

// Evaluates ∇²m ≤ tol (condition i) and ∇²√m ≤ tol (condition ii), scaled
// by m resp. √m, over points × a v-grid spanning [v_w, v_x].
struct MinimaxityReport {
  ConditionReport condition_m;
  ConditionReport condition_sqrt_m;
};
MinimaxityReport minimaxity_scan(const Prior& prior, const ModelConfig& model,
                                 std::span<const Eigen::VectorXd> points,
                                 int v_nodes = 9, double tol = 1e-9);

enum class RayDirection { Ones, FirstAxis };

struct RiskCurveConfig {
  double v_x = 1.0;
  double v_y = 0.2;
  std::vector<int> dims;
  std::vector<Prior> priors;
  RayDirection ray = RayDirection::Ones;
  std::vector<double> c_grid;  // strictly increasing
  long replicates = 100000;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct RiskCurveRow {
  double c;
  int p;
  std::string estimator;
  double gap;
  double std_error;
  long replicates;
  std::uint64_t seed;
};

// KL gap versus p̂_U along mu = c·direction for every (p, prior, c); grid
// points run in parallel with counter-derived substreams, draws are shared
// across priors and dimensions at each c.
std::vector<RiskCurveRow> risk_curve(const RiskCurveConfig& config);

struct DensitySliceConfig {
  ModelConfig model;
  Prior prior;
  std::vector<Eigen::VectorXd> x_points;
  std::vector<double> y1_grid;
  std::vector<double> y2_grid;
};

struct DensitySliceRow {
  int panel;
  double y1;
  double y2;
  double pdf_uniform;
  double pdf_prior;
};

// Densities on the slice y = (y1, y2, 0, ..., 0) for each conditioning
// point; regenerates the two-coordinate density panels.
std::vector<DensitySliceRow> density_slice(const DensitySliceConfig& config);

namespace detail {
// Gauss-Legendre nodes/weights on [a, b] (Newton iteration on P_n).
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);
}  // namespace detail

}  // namespace shrinklab
