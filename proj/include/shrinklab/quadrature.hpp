#pragma once

#include <functional>

namespace shrinklab::detail {

// log ∫₀¹ exp(logf(u, 1−u)) du for a positive integrand supplied in log
// space.  The complement argument is exact near u = 1, where the mixing
// weights of the scale-mixture marginals need it.  Max-subtraction keeps
// the exponentiation in range; integrable endpoint singularities are
// handled by the tanh-sinh rule.  Throws ConvergenceError when the
// estimated relative error exceeds the acceptance bound.
double log_integrate_unit(const std::function<double(double, double)>& logf,
                          double rel_tol = 1e-10);

}  // namespace shrinklab::detail
