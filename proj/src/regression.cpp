#include "shrinklab/regression.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "shrinklab/marginal.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/util.hpp"

namespace shrinklab {

LinearModel::LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() < 1 || a_.cols() < 1)
    throw std::invalid_argument("LinearModel: A must be nonempty");
  if (b_.cols() != a_.cols())
    throw std::invalid_argument("LinearModel: A and B must have equal column counts");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw std::invalid_argument("LinearModel: A is rank deficient");

  ata_ = a_.transpose() * a_;
  c_ = ata_ + b_.transpose() * b_;
  Eigen::LLT<Eigen::MatrixXd> llt_a(ata_);
  Eigen::LLT<Eigen::MatrixXd> llt_c(c_);
  if (llt_a.info() != Eigen::Success || llt_c.info() != Eigen::Success)
    throw std::invalid_argument("LinearModel: normal equations not positive definite");
  const int p = static_cast<int>(a_.cols());
  sigma_a_ = llt_a.solve(Eigen::MatrixXd::Identity(p, p));
  sigma_c_ = llt_c.solve(Eigen::MatrixXd::Identity(p, p));
  log_det_ata_ = 2.0 * Eigen::MatrixXd(llt_a.matrixL()).diagonal().array().log().sum();
  log_det_c_ = 2.0 * Eigen::MatrixXd(llt_c.matrixL()).diagonal().array().log().sum();
  rotation_ = simultaneous_diagonalize(*this);
}

LinearModel::Fit LinearModel::least_squares(const Eigen::VectorXd& x) const {
  check_dim(x, m(), "least_squares");
  Eigen::LLT<Eigen::MatrixXd> llt(ata_);
  const Eigen::VectorXd beta = llt.solve(a_.transpose() * x);
  return Fit{beta, (x - a_ * beta).squaredNorm()};
}

LinearModel::Fit LinearModel::least_squares(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y) const {
  check_dim(x, m(), "least_squares");
  check_dim(y, n(), "least_squares");
  Eigen::LLT<Eigen::MatrixXd> llt(c_);
  const Eigen::VectorXd beta =
      llt.solve(a_.transpose() * x + b_.transpose() * y);
  return Fit{beta, (x - a_ * beta).squaredNorm() + (y - b_ * beta).squaredNorm()};
}

Rotation simultaneous_diagonalize(const LinearModel& model) {
  const int p = model.p();
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma_a());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("simultaneous_diagonalize: Sigma_A not SPD");
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd whitened = l.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd(l.triangularView<Eigen::Lower>()
                          .solve(model.sigma_c())
                          .transpose()));
  // whitened = L⁻¹ Σ_C L⁻ᵀ, symmetric p.s.d.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (whitened + whitened.transpose()));
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("simultaneous_diagonalize: eigendecomposition failed");
  Rotation rot;
  rot.w = l * eig.eigenvectors();
  rot.w_inv = eig.eigenvectors().transpose() *
              l.triangularView<Eigen::Lower>()
                  .solve(Eigen::MatrixXd::Identity(p, p));
  rot.d = eig.eigenvalues().cwiseMin(1.0).cwiseMax(1e-12);
  rot.degenerate = (rot.d.array() > 1.0 - 1e-12).all();
  return rot;
}

double logpdf_uniform_reg(const LinearModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  const auto fx = model.least_squares(x);
  const auto fxy = model.least_squares(x, y);
  return -0.5 * model.n() * kLog2Pi + 0.5 * model.log_det_ata() -
         0.5 * model.log_det_c() - 0.5 * (fxy.rss - fx.rss);
}

double logpdf_bayes_reg(const Prior& prior, const LinearModel& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return logpdf_bayes_reg(prior, model, x, y, model.rotation());
}

double logpdf_bayes_reg(const Prior& prior, const LinearModel& model,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Rotation& rot) {
  const auto fx = model.least_squares(x);
  const auto fxy = model.least_squares(x, y);
  const Eigen::VectorXd zx = rot.w_inv * fx.beta_hat;
  const Eigen::VectorXd zxy = rot.w_inv * fxy.beta_hat;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.p());
  return marginal_log_density_diag(prior, zxy, rot.d) -
         marginal_log_density_diag(prior, zx, ones) +
         logpdf_uniform_reg(model, x, y);
}

TraceConditionReport trace_condition_check(const Prior& prior,
                                           const LinearModel& model,
                                           std::span<const Eigen::VectorXd> points,
                                           std::span<const double> w_grid,
                                           double tol) {
  const int p = model.p();
  const Rotation& rot = model.rotation();
  TraceConditionReport report;
  report.condition_m.worst = -std::numeric_limits<double>::infinity();
  report.condition_sqrt_m.worst = -std::numeric_limits<double>::infinity();
  const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

  for (const auto& beta : points) {
    check_dim(beta, p, "trace_condition_check");
    const Eigen::VectorXd u0 = rot.w_inv * beta;
    for (double w : w_grid) {
      if (!(w >= 0.0 && w <= 1.0))
        throw std::invalid_argument("trace_condition_check: w must be in [0,1]");
      const Eigen::VectorXd vw =
          w * Eigen::VectorXd::Ones(p) + (1.0 - w) * rot.d;
      const double l0 = marginal_log_density_diag(prior, u0, vw);
      double trace_m = 0.0, trace_sqrt = 0.0;
      Eigen::VectorXd u = u0;
      for (int i = 0; i < p; ++i) {
        const double h = h0 * std::max(1.0, std::abs(u0[i]));
        u[i] = u0[i] + h;
        const double lp = marginal_log_density_diag(prior, u, vw) - l0;
        u[i] = u0[i] - h;
        const double lm = marginal_log_density_diag(prior, u, vw) - l0;
        u[i] = u0[i];
        const double wgt = 1.0 - rot.d[i];
        // second differences of m/m(u0) and of √(m/m(u0)); the scaling
        // makes the threshold dimensionless and avoids underflow far out
        trace_m += wgt * (std::exp(lp) - 2.0 + std::exp(lm)) / (h * h);
        trace_sqrt +=
            wgt * (std::exp(0.5 * lp) - 2.0 + std::exp(0.5 * lm)) / (h * h);
      }
      if (trace_m > report.condition_m.worst) {
        report.condition_m.worst = trace_m;
        report.condition_m.witness = beta;
        report.condition_m.witness_v = w;
      }
      if (trace_sqrt > report.condition_sqrt_m.worst) {
        report.condition_sqrt_m.worst = trace_sqrt;
        report.condition_sqrt_m.witness = beta;
        report.condition_sqrt_m.witness_v = w;
      }
    }
  }
  report.condition_m.pass = report.condition_m.worst <= tol;
  report.condition_sqrt_m.pass = report.condition_sqrt_m.worst <= tol;
  return report;
}

RiskEstimate kl_gap_reg_mc(const Prior& prior, const LinearModel& model,
                           const Eigen::VectorXd& beta, long replicates,
                           std::uint64_t seed) {
  check_dim(beta, model.p(), "kl_gap_reg_mc");
  if (replicates <= 0)
    throw std::invalid_argument("kl_gap_reg_mc: replicates must be positive");
  const Rotation& rot = model.rotation();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.p());
  const Eigen::VectorXd ax = model.a() * beta;
  const Eigen::VectorXd by = model.b() * beta;
  RngStream rng(seed);
  RunningStat stat;
  for (long i = 0; i < replicates; ++i) {
    const Eigen::VectorXd x = ax + rng.normal_vec(model.m());
    const Eigen::VectorXd y = by + rng.normal_vec(model.n());
    const Eigen::VectorXd zx = rot.w_inv * model.least_squares(x).beta_hat;
    const Eigen::VectorXd zxy =
        rot.w_inv * model.least_squares(x, y).beta_hat;
    stat.add(marginal_log_density_diag(prior, zxy, rot.d) -
             marginal_log_density_diag(prior, zx, ones));
  }
  return RiskEstimate{stat.mean(), stat.std_error(), stat.count(), seed};
}

std::vector<RiskCurveRow> regress_curve(const LinearModel& model,
                                        const RegressCurveConfig& config) {
  if (config.beta_direction.size() != model.p())
    throw std::invalid_argument("regress_curve: direction length must equal p");
  for (std::size_t i = 1; i < config.c_grid.size(); ++i)
    if (!(config.c_grid[i] > config.c_grid[i - 1]))
      throw std::invalid_argument("regress_curve: c grid must be strictly increasing");
  const std::size_t nc = config.c_grid.size();
  const std::size_t ne = config.priors.size();
  if (nc == 0 || ne == 0) return {};

  std::vector<std::vector<RunningStat>> acc(nc, std::vector<RunningStat>(ne));
  const Rotation& rot = model.rotation();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.p());

  parallel_for_tasks(nc, config.threads, [&](std::size_t ci) {
    RngStream rng(config.seed, ci);
    const Eigen::VectorXd beta = config.c_grid[ci] * config.beta_direction;
    const Eigen::VectorXd ax = model.a() * beta;
    const Eigen::VectorXd by = model.b() * beta;
    for (long rep = 0; rep < config.replicates; ++rep) {
      const Eigen::VectorXd x = ax + rng.normal_vec(model.m());
      const Eigen::VectorXd y = by + rng.normal_vec(model.n());
      const Eigen::VectorXd zx = rot.w_inv * model.least_squares(x).beta_hat;
      const Eigen::VectorXd zxy =
          rot.w_inv * model.least_squares(x, y).beta_hat;
      for (std::size_t ei = 0; ei < ne; ++ei)
        acc[ci][ei].add(
            marginal_log_density_diag(config.priors[ei], zxy, rot.d) -
            marginal_log_density_diag(config.priors[ei], zx, ones));
    }
  });

  std::vector<RiskCurveRow> rows;
  rows.reserve(nc * ne);
  for (std::size_t ei = 0; ei < ne; ++ei)
    for (std::size_t ci = 0; ci < nc; ++ci)
      rows.push_back(RiskCurveRow{config.c_grid[ci], model.p(),
                                  prior_label(config.priors[ei]),
                                  acc[ci][ei].mean(), acc[ci][ei].std_error(),
                                  acc[ci][ei].count(), config.seed});
  return rows;
}

}  // namespace shrinklab
