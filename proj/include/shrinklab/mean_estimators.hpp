#pragma once

#include <variant>

#include <Eigen/Core>

#include "shrinklab/marginal.hpp"
#include "shrinklab/prior.hpp"
#include "shrinklab/subspace.hpp"

namespace shrinklab {

struct MleEstimator {};

// P_B x + (1 − (p−d−2)·v/|x−P_Bx|²) (x − P_Bx), optionally clamped at 0.
// Point targets (d = 0) give the classical rule with constant p−2; the
// subspace constant p−d−2 extrapolates the d = 1 equal-coordinates case.
struct JamesSteinEstimator {
  Subspace center;
  bool positive_part = false;
};

// Posterior mean through the marginal score: x + v·∇log m(x; v).
struct BayesMeanEstimator {
  Prior prior;
};

// Adaptive convex combination of the recentered posterior means, weighted
// by the posterior probabilities of the mixture components.
struct MultipleShrinkageEstimator {
  MixturePrior prior;
};

class MeanEstimator {
 public:
  using Variant = std::variant<MleEstimator, JamesSteinEstimator,
                               BayesMeanEstimator, MultipleShrinkageEstimator>;

  MeanEstimator(MleEstimator v) : v_(std::move(v)) {}
  MeanEstimator(JamesSteinEstimator v);
  MeanEstimator(BayesMeanEstimator v) : v_(std::move(v)) {}
  MeanEstimator(MultipleShrinkageEstimator v) : v_(std::move(v)) {}

  static MeanEstimator mle() { return MeanEstimator(MleEstimator{}); }
  static MeanEstimator james_stein(Subspace center, bool positive_part = false) {
    return MeanEstimator(JamesSteinEstimator{std::move(center), positive_part});
  }
  static MeanEstimator bayes(Prior prior) {
    return MeanEstimator(BayesMeanEstimator{std::move(prior)});
  }
  static MeanEstimator multiple_shrinkage(MixturePrior prior) {
    return MeanEstimator(MultipleShrinkageEstimator{std::move(prior)});
  }

  const Variant& variant() const { return v_; }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }

 private:
  Variant v_;
};

// Estimate of mu from X = x with X ~ N_p(mu, v I).  When a plain
// James-Stein rule is evaluated exactly at its target, the target itself is
// returned (the positive-part limit) and *at_target is set.
Eigen::VectorXd estimate_mean(const MeanEstimator& est,
                              const Eigen::VectorXd& x, double v,
                              bool* at_target = nullptr);

// Pointwise unbiased estimate of R_Q(mu, x) − R_Q(mu, Bayes rule) at (x, v):
//   v²·(|∇log m|² − 2∇²m/m)   ==   v²·(−4·∇²√m/√m)
// The two routes are returned separately and checked to agree.
struct QuadraticGap {
  double value;
  double value_sqrt_form;
};
QuadraticGap quadratic_gap_unbiased(const Prior& prior,
                                    const Eigen::VectorXd& x, double v);

std::string mean_estimator_label(const MeanEstimator& est);

}  // namespace shrinklab
