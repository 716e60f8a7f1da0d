#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "shrinklab/model.hpp"
#include "shrinklab/prior.hpp"

namespace shrinklab {

// Estimator families for the predictive density of Y given X = x.
struct UniformKind {};
struct BayesKind {
  Prior prior;
};
struct MultipleShrinkageKind {
  MixturePrior prior;
};
// Gaussian with mean (1 − k v_x/|x|²)₊ x and variance v_y + (1 − k v_x/|x|²)₊ v_x
struct EmpiricalBayesKind {
  double k;
};
// the true density p(y | mu), for calibration runs
struct OracleKind {
  Eigen::VectorXd mu;
};

class PredictiveEstimator {
 public:
  using Variant = std::variant<UniformKind, BayesKind, MultipleShrinkageKind,
                               EmpiricalBayesKind, OracleKind>;

  PredictiveEstimator(UniformKind v) : v_(std::move(v)) {}
  PredictiveEstimator(BayesKind v) : v_(std::move(v)) {}
  PredictiveEstimator(MultipleShrinkageKind v) : v_(std::move(v)) {}
  PredictiveEstimator(EmpiricalBayesKind v);
  PredictiveEstimator(OracleKind v) : v_(std::move(v)) {}

  static PredictiveEstimator uniform() { return UniformKind{}; }
  static PredictiveEstimator bayes(Prior prior) {
    return BayesKind{std::move(prior)};
  }
  static PredictiveEstimator multiple_shrinkage(MixturePrior prior) {
    return MultipleShrinkageKind{std::move(prior)};
  }
  static PredictiveEstimator empirical_bayes(double k) {
    return EmpiricalBayesKind{k};
  }
  static PredictiveEstimator oracle(Eigen::VectorXd mu) {
    return OracleKind{std::move(mu)};
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

std::string predictive_label(const PredictiveEstimator& est);

// An estimator bound to a model and a conditioning point x; the marginal of
// x is evaluated once at construction so density evaluations need a single
// marginal call.  Immutable and safe for concurrent use.
class PredictiveDensity {
 public:
  PredictiveDensity(PredictiveEstimator est, ModelConfig model,
                    Eigen::VectorXd x);

  double logpdf(const Eigen::VectorXd& y) const;

  // i.i.d. draws; Bayes kinds use sampling-importance-resampling from the
  // uniform-prior baseline with exact marginal-ratio weights.  Throws
  // LowEffectiveSampleSize when the weight pool degenerates.
  std::vector<Eigen::VectorXd> sample(int count, std::uint64_t seed) const;

  const PredictiveEstimator& estimator() const { return est_; }
  const ModelConfig& model() const { return model_; }
  const Eigen::VectorXd& x() const { return x_; }

 private:
  PredictiveEstimator est_;
  ModelConfig model_;
  Eigen::VectorXd x_;
  double log_m_x_ = 0.0;  // bayes kinds only
};

double logpdf_uniform(const ModelConfig& model, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y);

// W = (v_y X + v_x Y)/(v_x + v_y) ~ N_p(mu, v_w I)
Eigen::VectorXd w_statistic(const ModelConfig& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y);

// b(x, y) = m(w; v_w) / m(x; v_x)
double shrinkage_factor(const Prior& prior, const ModelConfig& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double logpdf_bayes(const Prior& prior, const ModelConfig& model,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double logpdf_empirical_bayes(const ModelConfig& model, double k,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y);

// Piecewise pseudo-marginal behind the positive-part James-Stein rule:
//   m(z; v) = k_p |z|^{-(p-2)}              for |z|²/v >= p−2
//           = v^{-(p-2)/2} exp(−|z|²/(2v))  otherwise
// with k_p = (e/(p−2))^{-(p-2)/2}; continuous across the boundary.
double pseudo_marginal_log(const Eigen::VectorXd& z, double v);

struct MassEstimate {
  double mass;
  double std_error;
  long replicates;
  std::uint64_t seed;
};

// Monte-Carlo mass of the pseudo-marginal "density": the integral of
// [m_JS+(w; v_w)/m_JS+(x; v_x)]·p̂_U(y|x) over y, which a bona fide Bayes
// rule would make exactly 1.
MassEstimate pseudo_marginal_normalization(const ModelConfig& model,
                                           const Eigen::VectorXd& x,
                                           long replicates = 100000,
                                           std::uint64_t seed = 0);

}  // namespace shrinklab
