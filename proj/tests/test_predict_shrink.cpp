#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shrinklab/mean_estimators.hpp"
#include "shrinklab/predictive.hpp"
#include "shrinklab/risk.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/util.hpp"

using namespace shrinklab;
using Eigen::VectorXd;

namespace {

// closed-form normal-prior predictive: N((1 − v_x/(v_x+nu))x,
// (v_x/(v_x+nu))v_y + (1 − v_x/(v_x+nu))(v_x+v_y))
double conjugate_logpdf(const ModelConfig& model, double nu,
                        const VectorXd& x, const VectorXd& y) {
  const double shrink = model.v_x / (model.v_x + nu);
  const double var = shrink * model.v_y + (1.0 - shrink) * (model.v_x + model.v_y);
  return gaussian_logpdf_iso(y, (1.0 - shrink) * x, var);
}

}  // namespace

TEST_CASE("uniform baseline density") {
  const ModelConfig m1(1, 1.0, 1.0);
  VectorXd x0 = VectorXd::Zero(1), y0 = VectorXd::Zero(1);
  CHECK(logpdf_uniform(m1, x0, y0) ==
        doctest::Approx(-0.5 * std::log(4.0 * M_PI)).epsilon(1e-14));
  CHECK(logpdf_uniform(m1, x0, y0) == doctest::Approx(-1.26551).epsilon(1e-5));

  SUBCASE("is a proper density with mean x") {
    const ModelConfig model(3, 1.0, 0.2);
    RngStream rng(3);
    const VectorXd x = rng.normal_vec(3);
    const PredictiveDensity d(PredictiveEstimator::uniform(), model, x);
    const auto mass = predictive_mass_mc(d, 20000, 17);
    CHECK(mass.mean == doctest::Approx(1.0).epsilon(1e-12));  // ratio is exactly 1
    const auto draws = d.sample(20000, 5);
    VectorXd mean = VectorXd::Zero(3);
    for (const auto& s : draws) mean += s;
    mean /= draws.size();
    CHECK((mean - x).norm() < 3.0 * std::sqrt(1.2 * 3.0 / 20000.0) + 0.05);
  }

  SUBCASE("dimension mismatch") {
    const ModelConfig model(3, 1.0, 0.2);
    CHECK_THROWS_AS(logpdf_uniform(model, VectorXd::Zero(3), VectorXd::Zero(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("shrinkage factor") {
  const ModelConfig model(5, 1.0, 0.2);
  RngStream rng(11);
  SUBCASE("uniform prior gives 1") {
    for (int i = 0; i < 5; ++i)
      CHECK(shrinkage_factor(Prior::uniform(), model, rng.normal_vec(5),
                             rng.normal_vec(5)) == 1.0);
  }
  SUBCASE("harmonic factor moves mass toward the origin") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 2.0;
    VectorXd y_toward = VectorXd::Zero(5);
    y_toward[0] = 1.0;  // on the origin side of x
    VectorXd y_beyond = VectorXd::Zero(5);
    y_beyond[0] = 3.5;  // far side
    CHECK(shrinkage_factor(Prior::harmonic(), model, x, y_toward) > 1.0);
    CHECK(shrinkage_factor(Prior::harmonic(), model, x, y_beyond) < 1.0);
  }
  SUBCASE("factor integrates to one against the baseline") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 2.0;
    const PredictiveDensity d(PredictiveEstimator::bayes(Prior::harmonic()),
                              model, x);
    const auto mass = predictive_mass_mc(d, 50000, 23);
    CHECK(std::abs(mass.mean - 1.0) < 3.0 * mass.std_error);
  }
}

TEST_CASE("bayes density closed forms and oracles") {
  RngStream rng(29);
  SUBCASE("normal prior reproduces the conjugate closed form") {
    for (int rep = 0; rep < 100; ++rep) {
      const int p = 1 + static_cast<int>(rng.uniform() * 7);
      const ModelConfig model(p, 0.3 + 2.0 * rng.uniform(),
                              0.1 + 1.5 * rng.uniform());
      const double nu = 0.2 + 3.0 * rng.uniform();
      const VectorXd x = 2.0 * rng.normal_vec(p);
      const VectorXd y = 2.0 * rng.normal_vec(p);
      const double lhs = logpdf_bayes(Prior::normal(nu), model, x, y);
      const double rhs = conjugate_logpdf(model, nu, x, y);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
  SUBCASE("uniform prior equals the baseline") {
    const ModelConfig model(4, 1.0, 0.5);
    const VectorXd x = rng.normal_vec(4), y = rng.normal_vec(4);
    CHECK(logpdf_bayes(Prior::uniform(), model, x, y) ==
          doctest::Approx(logpdf_uniform(model, x, y)).epsilon(1e-14));
  }
  SUBCASE("harmonic p=3 against two-layer numerical integration") {
    const ModelConfig model(3, 1.0, 1.0);
    for (int rep = 0; rep < 6; ++rep) {
      const VectorXd x = 1.5 * rng.normal_vec(3);
      const VectorXd y = 1.5 * rng.normal_vec(3);
      const double lhs = logpdf_bayes(Prior::harmonic(), model, x, y);
      const double rhs = oracles::bayes_logpdf_bruteforce_harmonic(model, x, y);
      CHECK(std::abs(lhs - rhs) < 1e-4);
    }
    VectorXd ones3 = VectorXd::Constant(3, 1.0);
    CHECK(std::abs(logpdf_bayes(Prior::harmonic(), model, ones3,
                                VectorXd::Zero(3)) -
                   oracles::bayes_logpdf_bruteforce_harmonic(
                       model, ones3, VectorXd::Zero(3))) < 1e-4);
  }
  SUBCASE("shift equivariance of point recentering") {
    const ModelConfig model(5, 1.0, 0.2);
    const VectorXd b = VectorXd::Constant(5, -1.5);
    const Prior shifted = Prior::recentered(Prior::harmonic(), Subspace::point(b));
    for (int rep = 0; rep < 8; ++rep) {
      const VectorXd x = 2.0 * rng.normal_vec(5);
      const VectorXd y = 2.0 * rng.normal_vec(5);
      CHECK(logpdf_bayes(shifted, model, x, y) ==
            doctest::Approx(logpdf_bayes(Prior::harmonic(), model, x - b, y - b))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("multiple shrinkage density paths agree") {
  const ModelConfig model(5, 1.0, 0.2);
  const VectorXd b1 = VectorXd::Constant(5, 2.0);
  const VectorXd b2 = VectorXd::Constant(5, -2.0);
  const MixturePrior mix{
      {0.5, 0.5},
      {Prior::recentered(Prior::harmonic(), Subspace::point(b1)),
       Prior::recentered(Prior::harmonic(), Subspace::point(b2))}};
  RngStream rng(31);
  for (int rep = 0; rep < 12; ++rep) {
    const VectorXd x = 3.0 * rng.normal_vec(5);
    const VectorXd y = 3.0 * rng.normal_vec(5);
    // route 1: marginal ratio with the mixture marginal
    const double ratio_route = logpdf_bayes(Prior(mix), model, x, y);
    // route 2: posterior-weighted combination of component densities
    const VectorXd q = mixture_weights(mix, x, model.v_x);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
      acc += q[i] * std::exp(logpdf_bayes(mix.components[i], model, x, y));
    CHECK(ratio_route == doctest::Approx(std::log(acc)).epsilon(1e-9));
  }
}

TEST_CASE("empirical bayes closed form") {
  const ModelConfig model(5, 1.0, 0.2);
  SUBCASE("worked example: k=3, |x|^2 = 9") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 3.0;
    VectorXd y = VectorXd::Zero(5);
    const double lp = logpdf_empirical_bayes(model, 3.0, x, y);
    const double var = 0.2 + 2.0 / 3.0;
    CHECK(lp == doctest::Approx(gaussian_logpdf_iso(y, (2.0 / 3.0) * x, var))
                    .epsilon(1e-14));
    CHECK(var == doctest::Approx(0.86667).epsilon(1e-4));
  }
  SUBCASE("full shrinkage inside the ball, including x = 0") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 1.0;  // |x|^2 = 1 <= k v_x = 3
    VectorXd y = VectorXd::Ones(5);
    CHECK(logpdf_empirical_bayes(model, 3.0, x, y) ==
          doctest::Approx(gaussian_logpdf_iso(y, VectorXd::Zero(5), 0.2))
              .epsilon(1e-14));
    CHECK(logpdf_empirical_bayes(model, 3.0, VectorXd::Zero(5), y) ==
          doctest::Approx(gaussian_logpdf_iso(y, VectorXd::Zero(5), 0.2))
              .epsilon(1e-14));
  }
  SUBCASE("approaches the baseline far out") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 1e5;
    VectorXd y = x;
    y[1] = 0.7;
    CHECK(logpdf_empirical_bayes(model, 3.0, x, y) ==
          doctest::Approx(logpdf_uniform(model, x, y)).epsilon(1e-3));
  }
}

TEST_CASE("sampling") {
  const ModelConfig model(5, 1.0, 0.2);
  RngStream rng(37);
  SUBCASE("deterministic given the seed") {
    VectorXd x = rng.normal_vec(5);
    const PredictiveDensity d(PredictiveEstimator::bayes(Prior::harmonic()),
                              model, x);
    const auto s1 = d.sample(64, 123);
    const auto s2 = d.sample(64, 123);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i)
      CHECK((s1[i] - s2[i]).norm() == 0.0);
  }
  SUBCASE("oracle kind: sample covariance near v_y I") {
    const VectorXd mu = VectorXd::Constant(5, 0.5);
    const PredictiveDensity d(PredictiveEstimator::oracle(mu), model,
                              VectorXd::Zero(5));
    const auto draws = d.sample(30000, 71);
    VectorXd mean = VectorXd::Zero(5);
    for (const auto& s : draws) mean += s;
    mean /= draws.size();
    double var = 0.0;
    for (const auto& s : draws) var += (s - mean).squaredNorm();
    var /= (5.0 * (draws.size() - 1));
    CHECK(var == doctest::Approx(0.2).epsilon(0.03));
    CHECK((mean - mu).norm() < 0.02);
  }
  SUBCASE("bayes kind: sample mean matches the posterior mean") {
    VectorXd x = VectorXd::Zero(5);
    x[0] = 2.0;
    const PredictiveDensity d(PredictiveEstimator::bayes(Prior::harmonic()),
                              model, x);
    const auto draws = d.sample(20000, 41);
    VectorXd mean = VectorXd::Zero(5);
    for (const auto& s : draws) mean += s;
    mean /= draws.size();
    const VectorXd post =
        estimate_mean(MeanEstimator::bayes(Prior::harmonic()), x, model.v_x);
    // 3 SE with per-coordinate variance ~ v_y + posterior spread
    CHECK((mean - post).norm() < 3.0 * std::sqrt(5.0 * 1.2 / 20000.0) + 0.05);
  }
}

TEST_CASE("pseudo-marginal failure demonstration") {
  SUBCASE("piecewise form is continuous at the boundary") {
    for (int p : {3, 5, 9}) {
      for (double v : {0.2, 1.0, 3.0}) {
        const double r = std::sqrt((p - 2.0) * v);
        VectorXd z = VectorXd::Zero(p);
        z[0] = r * (1.0 - 1e-9);
        const double below = pseudo_marginal_log(z, v);
        z[0] = r * (1.0 + 1e-9);
        const double above = pseudo_marginal_log(z, v);
        CHECK(below == doctest::Approx(above).epsilon(1e-7));
      }
    }
  }
  SUBCASE("its positive-part James-Stein score") {
    // x + v∇log m recovers JS+ on both branches
    const int p = 5;
    const double v = 1.0;
    const auto jsp =
        MeanEstimator::james_stein(Subspace::point(VectorXd::Zero(p)), true);
    for (double r : {0.5, 1.0, 2.5, 6.0}) {
      VectorXd x = VectorXd::Zero(p);
      x[0] = r;
      const double h = 1e-6;
      VectorXd grad(p);
      for (int i = 0; i < p; ++i) {
        VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        grad[i] =
            (pseudo_marginal_log(xp, v) - pseudo_marginal_log(xm, v)) / (2.0 * h);
      }
      CHECK((x + v * grad - estimate_mean(jsp, x, v)).norm() < 1e-5);
    }
  }
  SUBCASE("the implied predictive density is not a density") {
    const ModelConfig model(5, 1.0, 0.2);
    std::vector<MassEstimate> masses;
    for (double r : {0.5, 3.0, 8.0}) {
      VectorXd x = VectorXd::Zero(5);
      x[0] = r;
      masses.push_back(pseudo_marginal_normalization(model, x, 100000, 13));
    }
    // far from 1 at small |x|
    CHECK(std::abs(masses[0].mass - 1.0) > 5.0 * masses[0].std_error);
    // masses vary across x
    CHECK(std::abs(masses[0].mass - masses[2].mass) >
          5.0 * std::hypot(masses[0].std_error, masses[2].std_error));
    // drifts back toward 1 far out
    CHECK(std::abs(masses[2].mass - 1.0) < std::abs(masses[0].mass - 1.0));
  }
}

TEST_CASE("propriety across kinds") {
  const ModelConfig model(5, 1.0, 0.2);
  RngStream rng(43);
  VectorXd x = rng.normal_vec(5);
  const MixturePrior mix{
      {0.5, 0.5},
      {Prior::recentered(Prior::harmonic(),
                         Subspace::point(VectorXd::Constant(5, 2.0))),
       Prior::recentered(Prior::harmonic(),
                         Subspace::point(VectorXd::Constant(5, -2.0)))}};
  const std::vector<PredictiveEstimator> kinds = {
      PredictiveEstimator::uniform(),
      PredictiveEstimator::bayes(Prior::harmonic()),
      PredictiveEstimator::bayes(Prior::normal(1.0)),
      PredictiveEstimator::bayes(Prior::strawderman(0.5, 1.0)),
      PredictiveEstimator::multiple_shrinkage(mix),
      PredictiveEstimator::empirical_bayes(3.0),
      PredictiveEstimator::oracle(VectorXd::Zero(5))};
  for (const auto& kind : kinds) {
    const PredictiveDensity d(kind, model, x);
    const auto mass = predictive_mass_mc(d, 40000, 53);
    INFO(predictive_label(kind));
    CHECK(std::abs(mass.mean - 1.0) <= 3.0 * mass.std_error + 1e-9);
  }
}
