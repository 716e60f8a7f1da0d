#include "shrinklab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "shrinklab/util.hpp"

namespace shrinklab::detail {

namespace {
constexpr double kAcceptFactor = 100.0;  // accept rel_tol·100 before failing
}

double log_integrate_unit(const std::function<double(double, double)>& logf,
                          double rel_tol) {
  // Locate the scale for max-subtraction on a coarse grid.
  constexpr int kScan = 65;
  double log_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double u = (i + 0.5) / kScan;
    const double v = logf(u, 1.0 - u);
    if (std::isfinite(v)) log_max = std::max(log_max, v);
  }
  if (!std::isfinite(log_max)) return -std::numeric_limits<double>::infinity();

  thread_local boost::math::quadrature::tanh_sinh<double> integ(12);

  // Split at 1/2 and fold the right half so each piece exposes its
  // endpoint at 0 with full precision in the small variable.
  auto left = [&](double u) { return std::exp(logf(u, 1.0 - u) - log_max); };
  auto right = [&](double xi) { return std::exp(logf(1.0 - xi, xi) - log_max); };

  double err_l = 0, err_r = 0, l1_l = 0, l1_r = 0;
  const double il = integ.integrate(left, 0.0, 0.5, rel_tol, &err_l, &l1_l);
  const double ir = integ.integrate(right, 0.0, 0.5, rel_tol, &err_r, &l1_r);

  const double total = il + ir;
  const double l1 = l1_l + l1_r;
  if (!(total > 0.0) || !std::isfinite(total))
    return -std::numeric_limits<double>::infinity();

  const double achieved = (err_l + err_r) / std::max(l1, total);
  if (achieved > kAcceptFactor * rel_tol)
    throw ConvergenceError("log_integrate_unit: quadrature did not converge",
                           achieved, rel_tol);
  return log_max + std::log(total);
}

}  // namespace shrinklab::detail
