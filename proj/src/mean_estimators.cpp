#include "shrinklab/mean_estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "shrinklab/util.hpp"

namespace shrinklab {

MeanEstimator::MeanEstimator(JamesSteinEstimator v) : v_(std::move(v)) {
  const auto& js = std::get<JamesSteinEstimator>(v_);
  const int eff = js.center.ambient_dim() - js.center.dim();
  if (eff < 3)
    throw std::invalid_argument(
        "JamesSteinEstimator: requires p - dim(center) >= 3");
}

Eigen::VectorXd estimate_mean(const MeanEstimator& est,
                              const Eigen::VectorXd& x, double v,
                              bool* at_target) {
  if (!(v > 0.0))
    throw std::invalid_argument("estimate_mean: v must be positive");
  if (at_target) *at_target = false;

  if (est.is<MleEstimator>()) return x;

  if (est.is<JamesSteinEstimator>()) {
    const auto& js = est.as<JamesSteinEstimator>();
    check_dim(x, js.center.ambient_dim(), "estimate_mean");
    const Eigen::VectorXd target = js.center.project(x);
    const Eigen::VectorXd resid = x - target;
    const double n2 = resid.squaredNorm();
    const double c =
        static_cast<double>(js.center.ambient_dim() - js.center.dim() - 2);
    if (n2 == 0.0) {
      if (at_target) *at_target = true;
      return target;
    }
    double factor = 1.0 - c * v / n2;
    if (js.positive_part && factor < 0.0) factor = 0.0;
    return target + factor * resid;
  }

  if (est.is<BayesMeanEstimator>()) {
    const auto eval = marginal_eval(est.as<BayesMeanEstimator>().prior, x, v);
    return x + v * eval.grad_log_m;
  }

  // multiple shrinkage: sum of posterior-weighted component posterior means
  const auto& mix = est.as<MultipleShrinkageEstimator>().prior;
  const Eigen::VectorXd q = mixture_weights(mix, x, v);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    const auto eval = marginal_eval(mix.components[i], x, v);
    out += q[static_cast<Eigen::Index>(i)] * (x + v * eval.grad_log_m);
  }
  return out;
}

QuadraticGap quadratic_gap_unbiased(const Prior& prior,
                                    const Eigen::VectorXd& x, double v) {
  const auto eval = marginal_eval(prior, x, v);
  const double g2 = eval.grad_log_m.squaredNorm();
  QuadraticGap out;
  out.value = v * v * (g2 - 2.0 * eval.laplacian_m_over_m);
  out.value_sqrt_form = v * v * (-4.0 * eval.laplacian_sqrt_m_over_sqrt_m);
  const double scale = std::max({std::abs(out.value), std::abs(out.value_sqrt_form), 1e-12});
  if (std::abs(out.value - out.value_sqrt_form) > 1e-8 * scale)
    throw std::runtime_error(
        "quadratic_gap_unbiased: score and sqrt-form routes disagree");
  return out;
}

std::string mean_estimator_label(const MeanEstimator& est) {
  if (est.is<MleEstimator>()) return "mle";
  if (est.is<JamesSteinEstimator>())
    return est.as<JamesSteinEstimator>().positive_part ? "js+" : "js";
  if (est.is<BayesMeanEstimator>())
    return "bayes:" + prior_label(est.as<BayesMeanEstimator>().prior);
  return "multiple-shrinkage:" +
         prior_label(Prior(est.as<MultipleShrinkageEstimator>().prior));
}

}  // namespace shrinklab
