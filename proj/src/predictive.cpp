#include "shrinklab/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shrinklab/marginal.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/util.hpp"

namespace shrinklab {

PredictiveEstimator::PredictiveEstimator(EmpiricalBayesKind v) : v_(v) {
  if (!(std::get<EmpiricalBayesKind>(v_).k >= 0.0))
    throw std::invalid_argument("EmpiricalBayesKind: k must be nonnegative");
}

std::string predictive_label(const PredictiveEstimator& est) {
  struct Visitor {
    std::string operator()(const UniformKind&) const { return "uniform"; }
    std::string operator()(const BayesKind& b) const {
      return "bayes:" + prior_label(b.prior);
    }
    std::string operator()(const MultipleShrinkageKind& m) const {
      return "multiple-shrinkage:" + prior_label(Prior(m.prior));
    }
    std::string operator()(const EmpiricalBayesKind& e) const {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "empirical-bayes(k=%g)", e.k);
      return buf;
    }
    std::string operator()(const OracleKind&) const { return "oracle"; }
  };
  return std::visit(Visitor{}, est.variant());
}

double logpdf_uniform(const ModelConfig& model, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
  check_dim(x, model.p, "logpdf_uniform");
  check_dim(y, model.p, "logpdf_uniform");
  return gaussian_logpdf_iso(y, x, model.v_x + model.v_y);
}

Eigen::VectorXd w_statistic(const ModelConfig& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  check_dim(x, model.p, "w_statistic");
  check_dim(y, model.p, "w_statistic");
  return (model.v_y * x + model.v_x * y) / (model.v_x + model.v_y);
}

double shrinkage_factor(const Prior& prior, const ModelConfig& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd w = w_statistic(model, x, y);
  return std::exp(marginal_log_density(prior, w, model.v_w()) -
                  marginal_log_density(prior, x, model.v_x));
}

double logpdf_bayes(const Prior& prior, const ModelConfig& model,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd w = w_statistic(model, x, y);
  return marginal_log_density(prior, w, model.v_w()) -
         marginal_log_density(prior, x, model.v_x) +
         logpdf_uniform(model, x, y);
}

double logpdf_empirical_bayes(const ModelConfig& model, double k,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
  check_dim(x, model.p, "logpdf_empirical_bayes");
  check_dim(y, model.p, "logpdf_empirical_bayes");
  if (!(k >= 0.0))
    throw std::invalid_argument("logpdf_empirical_bayes: k must be >= 0");
  const double n2 = x.squaredNorm();
  const double coef = n2 > 0.0 ? std::max(0.0, 1.0 - k * model.v_x / n2) : 0.0;
  return gaussian_logpdf_iso(y, coef * x, model.v_y + coef * model.v_x);
}

double pseudo_marginal_log(const Eigen::VectorXd& z, double v) {
  const int p = static_cast<int>(z.size());
  if (p < 3) throw std::domain_error("pseudo_marginal_log: requires p >= 3");
  const double c = static_cast<double>(p - 2);
  const double r2 = z.squaredNorm();
  if (r2 / v >= c) {
    const double log_kp = -0.5 * c * (1.0 - std::log(c));
    return log_kp - 0.5 * c * std::log(r2);
  }
  return -0.5 * c * std::log(v) - r2 / (2.0 * v);
}

PredictiveDensity::PredictiveDensity(PredictiveEstimator est,
                                     ModelConfig model, Eigen::VectorXd x)
    : est_(std::move(est)), model_(model), x_(std::move(x)) {
  check_dim(x_, model_.p, "PredictiveDensity");
  if (est_.is<BayesKind>()) {
    log_m_x_ = marginal_log_density(est_.as<BayesKind>().prior, x_, model_.v_x);
  } else if (est_.is<MultipleShrinkageKind>()) {
    log_m_x_ = marginal_log_density(Prior(est_.as<MultipleShrinkageKind>().prior),
                                    x_, model_.v_x);
  } else if (est_.is<OracleKind>()) {
    check_dim(est_.as<OracleKind>().mu, model_.p, "PredictiveDensity(oracle)");
  }
}

double PredictiveDensity::logpdf(const Eigen::VectorXd& y) const {
  check_dim(y, model_.p, "PredictiveDensity::logpdf");
  if (est_.is<UniformKind>()) return logpdf_uniform(model_, x_, y);
  if (est_.is<EmpiricalBayesKind>())
    return logpdf_empirical_bayes(model_, est_.as<EmpiricalBayesKind>().k, x_, y);
  if (est_.is<OracleKind>())
    return gaussian_logpdf_iso(y, est_.as<OracleKind>().mu, model_.v_y);
  const Prior& prior = est_.is<BayesKind>()
                           ? est_.as<BayesKind>().prior
                           : Prior(est_.as<MultipleShrinkageKind>().prior);
  const Eigen::VectorXd w = w_statistic(model_, x_, y);
  return marginal_log_density(prior, w, model_.v_w()) - log_m_x_ +
         logpdf_uniform(model_, x_, y);
}

std::vector<Eigen::VectorXd> PredictiveDensity::sample(
    int count, std::uint64_t seed) const {
  if (count <= 0)
    throw std::invalid_argument("PredictiveDensity::sample: count must be > 0");
  RngStream rng(seed);
  const int p = model_.p;
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);

  auto gaussian_draws = [&](const Eigen::VectorXd& mean, double var) {
    const double sd = std::sqrt(var);
    for (int i = 0; i < count; ++i) out.push_back(mean + sd * rng.normal_vec(p));
  };

  if (est_.is<UniformKind>()) {
    gaussian_draws(x_, model_.v_x + model_.v_y);
    return out;
  }
  if (est_.is<OracleKind>()) {
    gaussian_draws(est_.as<OracleKind>().mu, model_.v_y);
    return out;
  }
  if (est_.is<EmpiricalBayesKind>()) {
    const double k = est_.as<EmpiricalBayesKind>().k;
    const double n2 = x_.squaredNorm();
    const double coef =
        n2 > 0.0 ? std::max(0.0, 1.0 - k * model_.v_x / n2) : 0.0;
    gaussian_draws(coef * x_, model_.v_y + coef * model_.v_x);
    return out;
  }

  // Bayes kinds: SIR with proposal p_U and weights b(x, y).
  const Prior& prior = est_.is<BayesKind>()
                           ? est_.as<BayesKind>().prior
                           : Prior(est_.as<MultipleShrinkageKind>().prior);
  const int pool = std::max(64 * count, 4096);
  const double sd = std::sqrt(model_.v_x + model_.v_y);
  std::vector<Eigen::VectorXd> proposals;
  proposals.reserve(pool);
  std::vector<double> logw(pool);
  for (int j = 0; j < pool; ++j) {
    proposals.push_back(x_ + sd * rng.normal_vec(p));
    const Eigen::VectorXd w = w_statistic(model_, x_, proposals.back());
    logw[j] = marginal_log_density(prior, w, model_.v_w());
  }
  const double lse = log_sum_exp(logw);
  std::vector<double> wn(pool);
  double sumsq = 0.0;
  for (int j = 0; j < pool; ++j) {
    wn[j] = std::exp(logw[j] - lse);
    sumsq += wn[j] * wn[j];
  }
  const double ess = 1.0 / sumsq;
  const double threshold = 0.01 * pool;
  if (ess < threshold) throw LowEffectiveSampleSize(ess, threshold);

  // systematic resampling
  std::vector<double> cdf(pool);
  std::partial_sum(wn.begin(), wn.end(), cdf.begin());
  const double u0 = rng.uniform() / count;
  int j = 0;
  for (int i = 0; i < count; ++i) {
    const double u = u0 + static_cast<double>(i) / count;
    while (j < pool - 1 && cdf[j] < u) ++j;
    out.push_back(proposals[j]);
  }
  return out;
}

MassEstimate pseudo_marginal_normalization(const ModelConfig& model,
                                           const Eigen::VectorXd& x,
                                           long replicates,
                                           std::uint64_t seed) {
  check_dim(x, model.p, "pseudo_marginal_normalization");
  if (model.p < 3)
    throw std::domain_error("pseudo_marginal_normalization: requires p >= 3");
  if (replicates <= 0)
    throw std::invalid_argument("pseudo_marginal_normalization: replicates");
  const double log_m_x = pseudo_marginal_log(x, model.v_x);
  const double sd = std::sqrt(model.v_x + model.v_y);
  RngStream rng(seed);
  RunningStat stat;
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd y = x + sd * rng.normal_vec(model.p);
    const Eigen::VectorXd w = w_statistic(model, x, y);
    stat.add(std::exp(pseudo_marginal_log(w, model.v_w()) - log_m_x));
  }
  return MassEstimate{stat.mean(), stat.std_error(), stat.count(), seed};
}

}  // namespace shrinklab
