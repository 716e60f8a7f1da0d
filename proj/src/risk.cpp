#include "shrinklab/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "shrinklab/marginal.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/util.hpp"

namespace shrinklab {

namespace {

void check_replicates(long replicates) {
  if (replicates <= 0)
    throw std::invalid_argument("replicates must be positive");
}

RiskEstimate to_estimate(const RunningStat& stat, std::uint64_t seed) {
  return RiskEstimate{stat.mean(), stat.std_error(), stat.count(), seed};
}

double predictive_logpdf(const PredictiveEstimator& est,
                         const ModelConfig& model, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y) {
  if (est.is<UniformKind>()) return logpdf_uniform(model, x, y);
  if (est.is<BayesKind>()) return logpdf_bayes(est.as<BayesKind>().prior, model, x, y);
  if (est.is<MultipleShrinkageKind>())
    return logpdf_bayes(Prior(est.as<MultipleShrinkageKind>().prior), model, x, y);
  if (est.is<EmpiricalBayesKind>())
    return logpdf_empirical_bayes(model, est.as<EmpiricalBayesKind>().k, x, y);
  return gaussian_logpdf_iso(y, est.as<OracleKind>().mu, model.v_y);
}

}  // namespace

RiskEstimate kl_loss_mc(const ModelConfig& model, const Eigen::VectorXd& mu,
                        const PredictiveDensity& density, long replicates,
                        std::uint64_t seed) {
  check_dim(mu, model.p, "kl_loss_mc");
  check_replicates(replicates);
  RngStream rng(seed);
  RunningStat stat;
  const double sd = std::sqrt(model.v_y);
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd y = mu + sd * rng.normal_vec(model.p);
    const double lp = density.logpdf(y);
    if (!std::isfinite(lp))
      throw std::domain_error("kl_loss_mc: non-finite logpdf at a sampled y");
    stat.add(gaussian_logpdf_iso(y, mu, model.v_y) - lp);
  }
  return to_estimate(stat, seed);
}

std::vector<RiskEstimate> kl_risk_mc_sweep(
    const ModelConfig& model, const Eigen::VectorXd& mu,
    std::span<const PredictiveEstimator> estimators, long replicates,
    std::uint64_t seed) {
  check_dim(mu, model.p, "kl_risk_mc_sweep");
  check_replicates(replicates);
  RngStream rng(seed);
  std::vector<RunningStat> stats(estimators.size());
  const double sdx = std::sqrt(model.v_x);
  const double sdy = std::sqrt(model.v_y);
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd x = mu + sdx * rng.normal_vec(model.p);
    const Eigen::VectorXd y = mu + sdy * rng.normal_vec(model.p);
    const double log_true = gaussian_logpdf_iso(y, mu, model.v_y);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const double lp = predictive_logpdf(estimators[e], model, x, y);
      if (!std::isfinite(lp))
        throw std::domain_error("kl_risk_mc: non-finite logpdf at a sample");
      stats[e].add(log_true - lp);
    }
  }
  std::vector<RiskEstimate> out;
  out.reserve(stats.size());
  for (const auto& s : stats) out.push_back(to_estimate(s, seed));
  return out;
}

RiskEstimate kl_risk_mc(const ModelConfig& model, const Eigen::VectorXd& mu,
                        const PredictiveEstimator& estimator, long replicates,
                        std::uint64_t seed) {
  return kl_risk_mc_sweep(model, mu, std::span(&estimator, 1), replicates,
                          seed)[0];
}

RiskEstimate kl_gap_via_marginals(const Prior& prior, const ModelConfig& model,
                                  const Eigen::VectorXd& mu, long replicates,
                                  std::uint64_t seed) {
  check_dim(mu, model.p, "kl_gap_via_marginals");
  check_replicates(replicates);
  RngStream rng(seed);
  RunningStat stat;
  const double sdx = std::sqrt(model.v_x);
  const double sdw = std::sqrt(model.v_w());
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd z = rng.normal_vec(model.p);
    stat.add(marginal_log_density(prior, mu + sdw * z, model.v_w()) -
             marginal_log_density(prior, mu + sdx * z, model.v_x));
  }
  return to_estimate(stat, seed);
}

std::vector<RiskEstimate> quadratic_risk_mc_sweep(
    std::span<const MeanEstimator> estimators, const Eigen::VectorXd& mu,
    double v, long replicates, std::uint64_t seed) {
  check_replicates(replicates);
  if (!(v > 0.0))
    throw std::invalid_argument("quadratic_risk_mc: v must be positive");
  RngStream rng(seed);
  std::vector<RunningStat> stats(estimators.size());
  const double sd = std::sqrt(v);
  const Eigen::Index p = mu.size();
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd x = mu + sd * rng.normal_vec(p);
    for (std::size_t e = 0; e < estimators.size(); ++e)
      stats[e].add((estimate_mean(estimators[e], x, v) - mu).squaredNorm());
  }
  std::vector<RiskEstimate> out;
  out.reserve(stats.size());
  for (const auto& s : stats) out.push_back(to_estimate(s, seed));
  return out;
}

RiskEstimate quadratic_risk_mc(const MeanEstimator& est,
                               const Eigen::VectorXd& mu, double v,
                               long replicates, std::uint64_t seed) {
  return quadratic_risk_mc_sweep(std::span(&est, 1), mu, v, replicates,
                                 seed)[0];
}

RiskEstimate predictive_mass_mc(const PredictiveDensity& density,
                                long replicates, std::uint64_t seed) {
  check_replicates(replicates);
  const ModelConfig& model = density.model();
  const Eigen::VectorXd& x = density.x();
  RngStream rng(seed);
  RunningStat stat;
  const double sd = std::sqrt(model.v_x + model.v_y);
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd y = x + sd * rng.normal_vec(model.p);
    stat.add(std::exp(density.logpdf(y) - logpdf_uniform(model, x, y)));
  }
  return to_estimate(stat, seed);
}

namespace detail {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int mid = (n + 1) / 2;
  for (int i = 0; i < mid; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (b + a) - 0.5 * (b - a) * x;
    nodes[n - 1 - i] = 0.5 * (b + a) + 0.5 * (b - a) * x;
    weights[i] = weights[n - 1 - i] = 0.5 * (b - a) * w;
  }
}

}  // namespace detail

IdentityCheck risk_identity_check(const Prior& prior, const ModelConfig& model,
                                  const Eigen::VectorXd& mu, int v_nodes,
                                  long replicates, std::uint64_t seed) {
  check_dim(mu, model.p, "risk_identity_check");
  check_replicates(replicates);
  std::vector<double> vj, wj;
  detail::gauss_legendre(v_nodes, model.v_w(), model.v_x, vj, wj);
  RngStream rng(seed);
  RunningStat lhs, rhs;
  const double sdx = std::sqrt(model.v_x);
  const double sdw = std::sqrt(model.v_w());
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd z = rng.normal_vec(model.p);
    lhs.add(marginal_log_density(prior, mu + sdw * z, model.v_w()) -
            marginal_log_density(prior, mu + sdx * z, model.v_x));
    double acc = 0.0;
    for (int j = 0; j < v_nodes; ++j) {
      // the v² in the pointwise gap cancels against the v⁻² of the identity
      const double bracket =
          quadratic_gap_unbiased(prior, mu + std::sqrt(vj[j]) * z, vj[j]).value /
          (vj[j] * vj[j]);
      acc += wj[j] * bracket;
    }
    rhs.add(0.5 * acc);
  }
  return IdentityCheck{to_estimate(lhs, seed), to_estimate(rhs, seed)};
}

MinimaxityReport minimaxity_scan(const Prior& prior, const ModelConfig& model,
                                 std::span<const Eigen::VectorXd> points,
                                 int v_nodes, double tol) {
  if (v_nodes < 2)
    throw std::invalid_argument("minimaxity_scan: v_nodes must be >= 2");
  MinimaxityReport report;
  report.condition_m.worst = -std::numeric_limits<double>::infinity();
  report.condition_sqrt_m.worst = -std::numeric_limits<double>::infinity();
  const double vw = model.v_w();
  for (const auto& z : points) {
    check_dim(z, model.p, "minimaxity_scan");
    for (int j = 0; j < v_nodes; ++j) {
      const double v = vw + (model.v_x - vw) * j / (v_nodes - 1);
      const auto eval = marginal_eval(prior, z, v);
      if (eval.laplacian_m_over_m > report.condition_m.worst) {
        report.condition_m.worst = eval.laplacian_m_over_m;
        report.condition_m.witness = z;
        report.condition_m.witness_v = v;
      }
      if (eval.laplacian_sqrt_m_over_sqrt_m > report.condition_sqrt_m.worst) {
        report.condition_sqrt_m.worst = eval.laplacian_sqrt_m_over_sqrt_m;
        report.condition_sqrt_m.witness = z;
        report.condition_sqrt_m.witness_v = v;
      }
    }
  }
  report.condition_m.pass = report.condition_m.worst <= tol;
  report.condition_sqrt_m.pass = report.condition_sqrt_m.worst <= tol;
  return report;
}

std::vector<RiskCurveRow> risk_curve(const RiskCurveConfig& config) {
  if (config.dims.empty())
    throw std::invalid_argument("risk_curve: empty dimension list");
  for (int p : config.dims)
    if (p < 1) throw std::invalid_argument("risk_curve: p must be >= 1");
  for (std::size_t i = 1; i < config.c_grid.size(); ++i)
    if (!(config.c_grid[i] > config.c_grid[i - 1]))
      throw std::invalid_argument("risk_curve: c grid must be strictly increasing");
  check_replicates(config.replicates);

  const std::size_t nc = config.c_grid.size();
  const std::size_t np = config.dims.size();
  const std::size_t ne = config.priors.size();
  if (nc == 0 || ne == 0) return {};

  const int p_max = *std::max_element(config.dims.begin(), config.dims.end());
  const ModelConfig proto(p_max, config.v_x, config.v_y);
  const double sdx = std::sqrt(proto.v_x);
  const double sdw = std::sqrt(proto.v_w());

  // gap[c][p][prior]; one substream per c, draws shared across p and priors
  std::vector<std::vector<std::vector<RunningStat>>> acc(
      nc, std::vector<std::vector<RunningStat>>(np, std::vector<RunningStat>(ne)));

  parallel_for_tasks(nc, config.threads, [&](std::size_t ci) {
    RngStream rng(config.seed, ci);
    const double c = config.c_grid[ci];
    for (long rep = 0; rep < config.replicates; ++rep) {
      const Eigen::VectorXd z = rng.normal_vec(p_max);
      for (std::size_t pi = 0; pi < np; ++pi) {
        const int p = config.dims[pi];
        Eigen::VectorXd mu;
        if (config.ray == RayDirection::Ones)
          mu = Eigen::VectorXd::Constant(p, c);
        else {
          mu = Eigen::VectorXd::Zero(p);
          mu[0] = c;
        }
        const Eigen::VectorXd xw = mu + sdw * z.head(p);
        const Eigen::VectorXd xx = mu + sdx * z.head(p);
        for (std::size_t ei = 0; ei < ne; ++ei) {
          const double val =
              marginal_log_density(config.priors[ei], xw, proto.v_w()) -
              marginal_log_density(config.priors[ei], xx, proto.v_x);
          acc[ci][pi][ei].add(val);
        }
      }
    }
  });

  std::vector<RiskCurveRow> rows;
  rows.reserve(nc * np * ne);
  for (std::size_t pi = 0; pi < np; ++pi)
    for (std::size_t ei = 0; ei < ne; ++ei)
      for (std::size_t ci = 0; ci < nc; ++ci) {
        const auto& s = acc[ci][pi][ei];
        rows.push_back(RiskCurveRow{config.c_grid[ci], config.dims[pi],
                                    prior_label(config.priors[ei]), s.mean(),
                                    s.std_error(), s.count(), config.seed});
      }
  return rows;
}

std::vector<DensitySliceRow> density_slice(const DensitySliceConfig& config) {
  if (config.model.p < 2)
    throw std::invalid_argument("density_slice: requires p >= 2");
  if (config.y1_grid.empty() || config.y2_grid.empty())
    throw std::invalid_argument("density_slice: empty grid");
  std::vector<DensitySliceRow> rows;
  rows.reserve(config.x_points.size() * config.y1_grid.size() *
               config.y2_grid.size());
  for (std::size_t xi = 0; xi < config.x_points.size(); ++xi) {
    const Eigen::VectorXd& x = config.x_points[xi];
    check_dim(x, config.model.p, "density_slice");
    const PredictiveDensity density(PredictiveEstimator::bayes(config.prior),
                                    config.model, x);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(config.model.p);
    for (double y1 : config.y1_grid)
      for (double y2 : config.y2_grid) {
        y[0] = y1;
        y[1] = y2;
        rows.push_back(DensitySliceRow{
            static_cast<int>(xi), y1, y2,
            std::exp(logpdf_uniform(config.model, x, y)),
            std::exp(density.logpdf(y))});
      }
  }
  return rows;
}

}  // namespace shrinklab
