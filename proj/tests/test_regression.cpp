#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "shrinklab/predictive.hpp"
#include "shrinklab/regression.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/util.hpp"

using namespace shrinklab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int r, int c, RngStream& rng) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("least squares") {
  SUBCASE("identity design") {
    const LinearModel model(MatrixXd::Identity(3, 3), MatrixXd::Zero(1, 3));
    VectorXd x(3);
    x << 1, -2, 0.5;
    const auto fit = model.least_squares(x);
    CHECK((fit.beta_hat - x).norm() < 1e-12);
    CHECK(fit.rss < 1e-14);
  }
  SUBCASE("scalar joint fit") {
    const LinearModel model(MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1));
    VectorXd x(1), y(1);
    x << 1.0;
    y << 3.0;
    const auto fit = model.least_squares(x, y);
    CHECK(fit.beta_hat[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.rss == doctest::Approx(2.0).epsilon(1e-12));  // (x-y)^2/2
  }
  SUBCASE("normal equations on a random design") {
    RngStream rng(3);
    const MatrixXd a = random_matrix(8, 4, rng);
    const LinearModel model(a, MatrixXd::Zero(2, 4));
    const VectorXd x = rng.normal_vec(8);
    const auto fit = model.least_squares(x);
    const VectorXd lhs = a.transpose() * a * fit.beta_hat;
    const VectorXd rhs = a.transpose() * x;
    CHECK((lhs - rhs).norm() < 1e-10 * rhs.norm());
  }
  SUBCASE("rank deficiency is rejected") {
    MatrixXd bad(3, 2);
    bad << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(LinearModel(bad, MatrixXd::Zero(1, 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("simultaneous diagonalization") {
  SUBCASE("orthonormal designs give D = I/2 and orthogonal W") {
    const LinearModel model(MatrixXd::Identity(4, 4), MatrixXd::Identity(4, 4));
    const auto& rot = model.rotation();
    CHECK((rot.d - VectorXd::Constant(4, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rot.w * rot.w.transpose() - MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("B = 0 is degenerate with D = I") {
    RngStream rng(5);
    const LinearModel model(random_matrix(6, 3, rng), MatrixXd::Zero(2, 3));
    CHECK(model.rotation().degenerate);
    CHECK((model.rotation().d - VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("random designs reconstruct both covariances") {
    RngStream rng(7);
    for (int rep = 0; rep < 5; ++rep) {
      const LinearModel model(random_matrix(7, 3, rng), random_matrix(4, 3, rng));
      const auto& rot = model.rotation();
      const double err_a =
          (model.sigma_a() - rot.w * rot.w.transpose()).norm() /
          model.sigma_a().norm();
      const double err_c =
          (model.sigma_c() - rot.w * rot.d.asDiagonal() * rot.w.transpose())
              .norm() /
          model.sigma_c().norm();
      CHECK(err_a < 1e-8);
      CHECK(err_c < 1e-8);
      CHECK((rot.d.array() > 0.0).all());
      CHECK((rot.d.array() <= 1.0 + 1e-12).all());
      CHECK(rot.d.minCoeff() < 1.0);  // at least one strict when B != 0
      CHECK_FALSE(rot.degenerate);
    }
  }
}

TEST_CASE("uniform regression predictive") {
  SUBCASE("scalar case equals N(y; x, 2)") {
    const LinearModel model(MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1));
    RngStream rng(11);
    for (int rep = 0; rep < 5; ++rep) {
      VectorXd x(1), y(1);
      x << 2.0 * rng.normal();
      y << 2.0 * rng.normal();
      CHECK(logpdf_uniform_reg(model, x, y) ==
            doctest::Approx(gaussian_logpdf_iso(y, x, 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("normalization: the closed-form gaussian in y matches exactly") {
    RngStream rng(13);
    const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
    const VectorXd x = rng.normal_vec(6);
    const auto fx = model.least_squares(x);
    const MatrixXd cov = MatrixXd::Identity(4, 4) +
                         model.b() * model.sigma_a() * model.b().transpose();
    const Eigen::LLT<MatrixXd> llt(cov);
    const MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    for (int rep = 0; rep < 6; ++rep) {
      const VectorXd y = model.b() * fx.beta_hat + l * rng.normal_vec(4);
      const VectorXd r = y - model.b() * fx.beta_hat;
      const double expected = -0.5 * 4 * kLog2Pi - 0.5 * logdet -
                              0.5 * r.dot(llt.solve(r));
      CHECK(logpdf_uniform_reg(model, x, y) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
  SUBCASE("B = A: symmetric after removing the conditioning residual") {
    RngStream rng(17);
    const MatrixXd a = random_matrix(5, 3, rng);
    const LinearModel model(a, a);
    const VectorXd x = rng.normal_vec(5), y = rng.normal_vec(5);
    // p̂_U(y|x)·m(x) is the symmetric flat-prior joint: subtracting the
    // conditioning residual RSS_x/2 leaves c − RSS_{x,y}/2 on both sides
    const double lhs =
        logpdf_uniform_reg(model, x, y) - 0.5 * model.least_squares(x).rss;
    const double rhs =
        logpdf_uniform_reg(model, y, x) - 0.5 * model.least_squares(y).rss;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("bayes regression predictive") {
  SUBCASE("identity designs reduce to the mean problem") {
    const int p = 3;
    const double vx = 1.0, vy = 0.2;
    const LinearModel model(std::sqrt(1.0 / vx) * MatrixXd::Identity(p, p),
                            std::sqrt(1.0 / vy) * MatrixXd::Identity(p, p));
    const ModelConfig mean_model(p, vx, vy);
    RngStream rng(19);
    for (const Prior& prior :
         {Prior::uniform(), Prior::harmonic(), Prior::normal(1.0),
          Prior::strawderman(0.5, 1.0)}) {
      for (int rep = 0; rep < 4; ++rep) {
        const VectorXd x = 2.0 * rng.normal_vec(p);
        const VectorXd y = 2.0 * rng.normal_vec(p);
        const double reg = logpdf_bayes_reg(prior, model, x / std::sqrt(vx),
                                            y / std::sqrt(vy));
        double mean_value;
        if (prior.is<NormalPrior>()) {
          // a normal prior on beta maps to variance nu·vx on the mean scale
          mean_value = logpdf_bayes(
              Prior::normal(prior.as<NormalPrior>().nu * vx), mean_model, x, y);
        } else {
          mean_value = logpdf_bayes(prior, mean_model, x, y);
        }
        CHECK(reg == doctest::Approx(mean_value + 0.5 * p * std::log(vy))
                         .epsilon(1e-8));
      }
    }
  }
  SUBCASE("uniform prior equals the baseline") {
    RngStream rng(23);
    const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
    const VectorXd x = rng.normal_vec(6), y = rng.normal_vec(4);
    CHECK(logpdf_bayes_reg(Prior::uniform(), model, x, y) ==
          doctest::Approx(logpdf_uniform_reg(model, x, y)).epsilon(1e-13));
  }
  SUBCASE("scaled harmonic is a proper density in y (MC)") {
    RngStream rng(29);
    const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
    const VectorXd beta = rng.normal_vec(3);
    const VectorXd x = model.a() * beta + rng.normal_vec(6);
    const auto fx = model.least_squares(x);
    const MatrixXd cov = MatrixXd::Identity(4, 4) +
                         model.b() * model.sigma_a() * model.b().transpose();
    const Eigen::LLT<MatrixXd> llt(cov);
    const MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    RunningStat mass;
    for (int i = 0; i < 40000; ++i) {
      const VectorXd y = model.b() * fx.beta_hat + l * rng.normal_vec(4);
      const VectorXd r = y - model.b() * fx.beta_hat;
      const double proposal = -0.5 * 4 * kLog2Pi - 0.5 * logdet -
                              0.5 * r.dot(llt.solve(r));
      mass.add(std::exp(logpdf_bayes_reg(Prior::harmonic(), model, x, y) -
                        proposal));
    }
    CHECK(std::abs(mass.mean() - 1.0) < 3.0 * mass.std_error());
  }
  SUBCASE("invariant to the admissible rotation freedom") {
    RngStream rng(31);
    const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
    Rotation flipped = model.rotation();
    VectorXd signs(3);
    signs << 1.0, -1.0, -1.0;  // diagonal orthogonal Q commutes with D
    flipped.w = flipped.w * signs.asDiagonal();
    flipped.w_inv = signs.asDiagonal() * flipped.w_inv;
    const VectorXd x = rng.normal_vec(6), y = rng.normal_vec(4);
    for (const Prior& prior : {Prior::harmonic(), Prior::strawderman(0.5, 1.0)}) {
      CHECK(logpdf_bayes_reg(prior, model, x, y) ==
            doctest::Approx(logpdf_bayes_reg(prior, model, x, y, flipped))
                .epsilon(1e-8));
    }
    // proportional designs give equal d_i, so any orthogonal Q is admissible
    const MatrixXd a = random_matrix(6, 3, rng);
    MatrixXd b2 = 0.8 * a;
    const LinearModel prop(a, b2);
    Rotation rotated = prop.rotation();
    const MatrixXd q = oracles::random_orthogonal(3, rng);
    rotated.w = rotated.w * q;
    rotated.w_inv = q.transpose() * rotated.w_inv;
    const VectorXd x2 = rng.normal_vec(6), y2 = rng.normal_vec(6);
    CHECK(logpdf_bayes_reg(Prior::harmonic(), prop, x2, y2) ==
          doctest::Approx(logpdf_bayes_reg(Prior::harmonic(), prop, x2, y2,
                                           rotated))
              .epsilon(1e-8));
  }
}

TEST_CASE("trace condition check") {
  RngStream rng(37);
  std::vector<VectorXd> points;
  for (int i = 0; i < 20; ++i) {
    VectorXd z = rng.normal_vec(3);
    z *= (0.5 + 6.0 * i / 20.0) / z.norm();
    points.push_back(z);
  }
  const std::vector<double> w_grid = {0.0, 0.25, 0.5, 0.75, 1.0};

  SUBCASE("uniform prior: identically zero") {
    const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
    const auto rep =
        trace_condition_check(Prior::uniform(), model, points, w_grid);
    CHECK(rep.condition_m.pass);
    CHECK(std::abs(rep.condition_m.worst) < 1e-12);
  }
  SUBCASE("scaled harmonic passes on a proportional design") {
    // B'B = c A'A makes D scalar, so the weighted trace is a multiple of
    // the full laplacian and superharmonicity carries over
    const MatrixXd a = random_matrix(6, 3, rng);
    const LinearModel model(a, 0.8 * a);
    const auto rep =
        trace_condition_check(Prior::harmonic(), model, points, w_grid, 1e-7);
    CHECK(rep.condition_m.pass);
    CHECK(rep.condition_sqrt_m.pass);
  }
  SUBCASE("normal prior on beta: violation witness found") {
    const MatrixXd a = random_matrix(6, 3, rng);
    const LinearModel model(a, 0.8 * a);
    const auto rep =
        trace_condition_check(Prior::normal(1.0), model, points, w_grid);
    CHECK_FALSE(rep.condition_m.pass);
    CHECK(rep.condition_m.worst > 0.0);
    CHECK(rep.condition_m.witness.size() == 3);
  }
  SUBCASE("skewed designs break the pointwise trace bound far out") {
    // with d = (1/2, 1, 1) the weighted trace keeps only the first
    // second-derivative, which is positive along that axis at large radius
    MatrixXd b(1, 3);
    b << 1, 0, 0;
    const LinearModel model(MatrixXd::Identity(3, 3), b);
    VectorXd far(3);
    far << 10.0, 0.0, 0.0;
    const std::vector<VectorXd> far_points = {far};
    const auto rep = trace_condition_check(Prior::harmonic(), model,
                                           far_points, w_grid);
    CHECK_FALSE(rep.condition_m.pass);
  }
}

TEST_CASE("regression KL gap") {
  RngStream rng(41);
  const LinearModel model(random_matrix(6, 3, rng), random_matrix(4, 3, rng));
  SUBCASE("uniform prior: zero in every replicate") {
    const auto est = kl_gap_reg_mc(Prior::uniform(), model,
                                   VectorXd::Zero(3), 500, 43);
    CHECK(est.mean == 0.0);
  }
  SUBCASE("scaled harmonic dominates at sampled beta") {
    for (int rep = 0; rep < 3; ++rep) {
      const VectorXd beta = 1.5 * rng.normal_vec(3);
      const auto est = kl_gap_reg_mc(Prior::harmonic(), model, beta, 20000,
                                     47 + rep);
      CHECK(est.mean >= -3.0 * est.std_error);
    }
  }
  SUBCASE("curve output is deterministic") {
    RegressCurveConfig config;
    config.priors = {Prior::harmonic()};
    config.beta_direction = VectorXd::Ones(3);
    config.c_grid = {-1.0, 0.0, 1.0};
    config.replicates = 2000;
    config.seed = 53;
    config.threads = 2;
    const auto rows1 = regress_curve(model, config);
    config.threads = 1;
    const auto rows2 = regress_curve(model, config);
    REQUIRE(rows1.size() == rows2.size());
    for (std::size_t i = 0; i < rows1.size(); ++i)
      CHECK(rows1[i].gap == rows2[i].gap);
  }
}
