#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace shrinklab {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// Thrown when an adaptive quadrature cannot reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved, double requested)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) +
                           ", requested " + std::to_string(requested) + ")"),
        achieved_(achieved),
        requested_(requested) {}
  double achieved() const { return achieved_; }
  double requested() const { return requested_; }

 private:
  double achieved_;
  double requested_;
};

class LowEffectiveSampleSize : public std::runtime_error {
 public:
  LowEffectiveSampleSize(double ess, double threshold)
      : std::runtime_error("importance-sampling effective sample size " +
                           std::to_string(ess) + " below threshold " +
                           std::to_string(threshold)),
        ess_(ess) {}
  double ess() const { return ess_; }

 private:
  double ess_;
};

inline double sq(double x) { return x * x; }

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// log N_p(y; mean, var·I)
inline double gaussian_logpdf_iso(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& mean, double var) {
  if (y.size() != mean.size())
    throw std::invalid_argument("gaussian_logpdf_iso: dimension mismatch");
  const double p = static_cast<double>(y.size());
  return -0.5 * p * (kLog2Pi + std::log(var)) -
         (y - mean).squaredNorm() / (2.0 * var);
}

inline void check_dim(const Eigen::VectorXd& z, Eigen::Index p,
                      const char* where) {
  if (z.size() != p)
    throw std::invalid_argument(std::string(where) + ": expected vector of length " +
                                std::to_string(p) + ", got " +
                                std::to_string(z.size()));
}

}  // namespace shrinklab
