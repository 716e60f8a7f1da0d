#pragma once

#include <stdexcept>
#include <string>

namespace shrinklab {

// Two independent Gaussian observations with a common mean:
//   X | mu ~ N_p(mu, v_x I),   Y | mu ~ N_p(mu, v_y I).
struct ModelConfig {
  int p;
  double v_x;
  double v_y;

  ModelConfig(int p_, double vx, double vy) : p(p_), v_x(vx), v_y(vy) {
    if (p < 1) throw std::invalid_argument("ModelConfig: p must be >= 1");
    if (!(v_x > 0.0) || !(v_y > 0.0))
      throw std::invalid_argument("ModelConfig: variances must be positive");
  }

  // v_w = v_x v_y / (v_x + v_y), strictly inside (0, min(v_x, v_y))
  double v_w() const { return v_x * v_y / (v_x + v_y); }
};

}  // namespace shrinklab
