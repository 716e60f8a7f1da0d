#include "shrinklab/marginal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "shrinklab/quadrature.hpp"
#include "shrinklab/util.hpp"

namespace shrinklab {

namespace detail {

RadialMoments normal_radial_moments(int k, double r2, double v, double nu) {
  const double s2 = v + nu;
  RadialMoments out;
  out.log_m = -0.5 * k * (kLog2Pi + std::log(s2)) - r2 / (2.0 * s2);
  out.m1 = 1.0 / s2;
  out.m2 = out.m1 * out.m1;
  return out;
}

// m_H(z; v) = (2π)^{-k/2} (2/r²)^{k/2-1} γ(k/2-1, r²/(2v)), the exact
// integral ∫₀^∞ N_k(z; 0, (v+s) I) ds, with the j-th σ⁻²-moment obtained
// by bumping the gamma index: M_j = (2π)^{-k/2} (2/r²)^{a+j} γ(a+j, T).
RadialMoments harmonic_radial_moments(int k, double r2, double v, bool derivs) {
  if (k < 3)
    throw std::domain_error(
        "harmonic marginal requires effective dimension >= 3");
  const double a = 0.5 * k - 1.0;
  const double T = r2 / (2.0 * v);
  RadialMoments out{0.0, std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
  if (T < 1e-8) {
    // γ(a, T) = T^a (1/a − T/(a+1) + T²/(2(a+2)) − ...); the T^a factors
    // cancel against (2/r²)^a, removing the 0/0 at the origin.
    auto series = [T](double aj) {
      return 1.0 / aj - T / (aj + 1.0) + 0.5 * T * T / (aj + 2.0);
    };
    const double s0 = series(a);
    out.log_m = -0.5 * k * kLog2Pi - a * std::log(v) + std::log(s0);
    if (derivs) {
      out.m1 = series(a + 1.0) / (s0 * v);
      out.m2 = series(a + 2.0) / (s0 * v * v);
    }
    return out;
  }
  const double p0 = boost::math::gamma_p(a, T);
  out.log_m = -0.5 * k * kLog2Pi + a * std::log(2.0 / r2) +
              std::lgamma(a) + std::log(p0);
  if (derivs) {
    const double ratio1 = a * boost::math::gamma_p(a + 1.0, T) / p0;
    const double ratio2 =
        a * (a + 1.0) * boost::math::gamma_p(a + 2.0, T) / p0;
    out.m1 = (2.0 / r2) * ratio1;
    out.m2 = sq(2.0 / r2) * ratio2;
  }
  return out;
}

RadialMoments scale_mixture_radial_moments(int k, double r2, double v,
                                           double mix_a, double v0,
                                           bool derivs) {
  if (static_cast<double>(k) <= 2.0 * mix_a - 2.0)
    throw std::domain_error(
        "scale-mixture marginal is not finite: requires k > 2a - 2");
  // substitution u = s/(1+s):  (1+s)^{a-2} ds = (1-u)^{-a} du
  auto log_f = [&](int j) {
    return [=](double u, double cu) {
      const double s = u / cu;
      const double s2 = v + s * v0;
      return -mix_a * std::log(cu) -
             0.5 * k * (kLog2Pi + std::log(s2)) - r2 / (2.0 * s2) -
             j * std::log(s2);
    };
  };
  RadialMoments out{0.0, std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
  out.log_m = log_integrate_unit(log_f(0));
  if (derivs) {
    out.m1 = std::exp(log_integrate_unit(log_f(1)) - out.log_m);
    out.m2 = std::exp(log_integrate_unit(log_f(2)) - out.log_m);
  }
  return out;
}

namespace {

RadialMoments radial_moments(const Prior& prior, int k, double r2, double v,
                             bool derivs) {
  if (prior.is<HarmonicPrior>()) return harmonic_radial_moments(k, r2, v, derivs);
  if (prior.is<StrawdermanPrior>()) {
    const auto& s = prior.as<StrawdermanPrior>();
    return scale_mixture_radial_moments(k, r2, v, s.a, s.v0, derivs);
  }
  if (prior.is<NormalPrior>())
    return normal_radial_moments(k, r2, v, prior.as<NormalPrior>().nu);
  throw std::logic_error("radial_moments: not a spherically symmetric prior");
}

// resid is ambient-sized; k is the effective dimension after recentering.
MarginalEval assemble(const Eigen::VectorXd& resid, int k,
                      const RadialMoments& mom) {
  MarginalEval out;
  out.log_m = mom.log_m;
  out.grad_log_m = -mom.m1 * resid;
  const double r2 = resid.squaredNorm();
  out.laplacian_m_over_m = r2 * mom.m2 - k * mom.m1;
  out.laplacian_sqrt_m_over_sqrt_m =
      0.5 * out.laplacian_m_over_m - 0.25 * r2 * sq(mom.m1);
  if (!std::isfinite(out.log_m))
    throw std::domain_error("marginal evaluated to a non-finite value");
  return out;
}

}  // namespace
}  // namespace detail

double marginal_log_density(const Prior& prior, const Eigen::VectorXd& z,
                            double v) {
  if (!(v > 0.0))
    throw std::invalid_argument("marginal_log_density: v must be positive");
  struct Visitor {
    const Eigen::VectorXd& z;
    double v;
    double operator()(const UniformPrior&) const { return 0.0; }
    double operator()(const HarmonicPrior&) const {
      return detail::harmonic_radial_moments(static_cast<int>(z.size()),
                                             z.squaredNorm(), v, false)
          .log_m;
    }
    double operator()(const StrawdermanPrior& s) const {
      return detail::scale_mixture_radial_moments(static_cast<int>(z.size()),
                                                  z.squaredNorm(), v, s.a,
                                                  s.v0, false)
          .log_m;
    }
    double operator()(const NormalPrior& n) const {
      return detail::normal_radial_moments(static_cast<int>(z.size()),
                                           z.squaredNorm(), v, n.nu)
          .log_m;
    }
    double operator()(const RecenteredPrior& r) const {
      check_dim(z, r.subspace.ambient_dim(), "marginal_log_density");
      const Eigen::VectorXd resid = r.subspace.residual(z);
      const int k = r.subspace.ambient_dim() - r.subspace.dim();
      if (r.base->is<HarmonicPrior>())
        return detail::harmonic_radial_moments(k, resid.squaredNorm(), v, false)
            .log_m;
      if (r.base->is<StrawdermanPrior>()) {
        const auto& s = r.base->as<StrawdermanPrior>();
        return detail::scale_mixture_radial_moments(k, resid.squaredNorm(), v,
                                                    s.a, s.v0, false)
            .log_m;
      }
      return detail::normal_radial_moments(
                 k, resid.squaredNorm(), v, r.base->as<NormalPrior>().nu)
          .log_m;
    }
    double operator()(const MixturePrior& m) const {
      std::vector<double> lw(m.components.size());
      for (std::size_t i = 0; i < m.components.size(); ++i)
        lw[i] = std::log(m.weights[i]) +
                marginal_log_density(m.components[i], z, v);
      return log_sum_exp(lw);
    }
  };
  const double out = std::visit(Visitor{z, v}, prior.variant());
  if (std::isnan(out))
    throw std::domain_error("marginal evaluated to a non-finite value");
  return out;
}

MarginalEval marginal_eval(const Prior& prior, const Eigen::VectorXd& z,
                           double v) {
  if (!(v > 0.0))
    throw std::invalid_argument("marginal_eval: v must be positive");
  const Eigen::Index p = z.size();
  if (prior.is<UniformPrior>()) {
    return MarginalEval{0.0, Eigen::VectorXd::Zero(p), 0.0, 0.0};
  }
  if (prior.spherically_symmetric()) {
    const auto mom =
        detail::radial_moments(prior, static_cast<int>(p), z.squaredNorm(), v,
                               /*derivs=*/true);
    return detail::assemble(z, static_cast<int>(p), mom);
  }
  if (prior.is<RecenteredPrior>()) {
    const auto& r = prior.as<RecenteredPrior>();
    check_dim(z, r.subspace.ambient_dim(), "marginal_eval");
    const Eigen::VectorXd resid = r.subspace.residual(z);
    const int k = r.subspace.ambient_dim() - r.subspace.dim();
    const auto mom =
        detail::radial_moments(*r.base, k, resid.squaredNorm(), v, true);
    return detail::assemble(resid, k, mom);
  }
  // mixture: combine component evaluations with posterior weights
  const auto& mix = prior.as<MixturePrior>();
  std::vector<MarginalEval> parts;
  parts.reserve(mix.components.size());
  std::vector<double> lw(mix.components.size());
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    parts.push_back(marginal_eval(mix.components[i], z, v));
    lw[i] = std::log(mix.weights[i]) + parts.back().log_m;
  }
  const double log_z = log_sum_exp(lw);
  if (!std::isfinite(log_z))
    throw std::domain_error("mixture marginal vanished at this point");
  MarginalEval out;
  out.log_m = log_z;
  out.grad_log_m = Eigen::VectorXd::Zero(p);
  out.laplacian_m_over_m = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double q = std::exp(lw[i] - log_z);
    out.grad_log_m += q * parts[i].grad_log_m;
    out.laplacian_m_over_m += q * parts[i].laplacian_m_over_m;
  }
  out.laplacian_sqrt_m_over_sqrt_m = 0.5 * out.laplacian_m_over_m -
                                     0.25 * out.grad_log_m.squaredNorm();
  return out;
}

Eigen::VectorXd mixture_weights(const MixturePrior& prior,
                                const Eigen::VectorXd& z, double v) {
  const std::size_t n = prior.components.size();
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i)
    lw[i] = std::log(prior.weights[i]) +
            marginal_log_density(prior.components[i], z, v);
  const double log_z = log_sum_exp(lw);
  if (!std::isfinite(log_z))
    throw std::domain_error(
        "mixture_weights: all component marginals vanish at z");
  Eigen::VectorXd q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = std::exp(lw[i] - log_z);
  q /= q.sum();
  return q;
}

double marginal_log_density_diag(const Prior& prior, const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& v_diag) {
  if (z.size() != v_diag.size())
    throw std::invalid_argument("marginal_log_density_diag: dimension mismatch");
  if ((v_diag.array() <= 0.0).any())
    throw std::invalid_argument(
        "marginal_log_density_diag: variances must be positive");
  const int p = static_cast<int>(z.size());
  if (prior.is<UniformPrior>()) return 0.0;
  if (prior.is<NormalPrior>()) {
    const double nu = prior.as<NormalPrior>().nu;
    double out = 0.0;
    for (int i = 0; i < p; ++i) {
      const double s2 = v_diag[i] + nu;
      out += -0.5 * (kLog2Pi + std::log(s2)) - sq(z[i]) / (2.0 * s2);
    }
    return out;
  }
  double mix_a, v0;
  if (prior.is<HarmonicPrior>()) {
    if (p < 3)
      throw std::domain_error(
          "harmonic marginal requires effective dimension >= 3");
    mix_a = 2.0;
    v0 = 1.0;
  } else if (prior.is<StrawdermanPrior>()) {
    const auto& s = prior.as<StrawdermanPrior>();
    if (static_cast<double>(p) <= 2.0 * s.a - 2.0)
      throw std::domain_error(
          "scale-mixture marginal is not finite: requires p > 2a - 2");
    mix_a = s.a;
    v0 = s.v0;
  } else {
    throw std::invalid_argument(
        "marginal_log_density_diag: only uniform/harmonic/strawderman/normal "
        "priors are supported");
  }
  auto log_f = [&](double u, double cu) {
    const double s = u / cu;
    double acc = -mix_a * std::log(cu);
    for (int i = 0; i < p; ++i) {
      const double s2 = v_diag[i] + s * v0;
      acc += -0.5 * (kLog2Pi + std::log(s2)) - sq(z[i]) / (2.0 * s2);
    }
    return acc;
  };
  return detail::log_integrate_unit(log_f);
}

}  // namespace shrinklab
