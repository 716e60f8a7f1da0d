#include "shrinklab/prior.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace shrinklab {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

std::string subspace_label(const Subspace& s) {
  if (s.dim() == 0) {
    std::string out = "[";
    for (int i = 0; i < s.ambient_dim(); ++i) {
      if (i) out += ";";
      out += num(s.offset()[i]);
    }
    return out + "]";
  }
  return "affine(d=" + std::to_string(s.dim()) + ")";
}

}  // namespace

Prior::Prior(StrawdermanPrior v) : v_(std::move(v)) {
  const auto& s = std::get<StrawdermanPrior>(v_);
  if (!(s.a >= 0.0 && s.a <= 2.0))
    throw std::invalid_argument("StrawdermanPrior: a must lie in [0,2]");
  if (!(s.v0 > 0.0))
    throw std::invalid_argument("StrawdermanPrior: v0 must be positive");
}

Prior::Prior(NormalPrior v) : v_(std::move(v)) {
  if (!(std::get<NormalPrior>(v_).nu > 0.0))
    throw std::invalid_argument("NormalPrior: nu must be positive");
}

Prior::Prior(RecenteredPrior v) : v_(std::move(v)) {
  const auto& r = std::get<RecenteredPrior>(v_);
  if (!r.base) throw std::invalid_argument("RecenteredPrior: missing base");
  if (!r.base->spherically_symmetric())
    throw std::invalid_argument(
        "RecenteredPrior: base must be a spherically symmetric prior "
        "(harmonic, strawderman, or normal)");
}

Prior::Prior(MixturePrior v) : v_(std::move(v)) {
  const auto& m = std::get<MixturePrior>(v_);
  if (m.components.empty())
    throw std::invalid_argument("MixturePrior: components must be nonempty");
  if (m.weights.size() != m.components.size())
    throw std::invalid_argument("MixturePrior: weights/components size mismatch");
  double sum = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0))
      throw std::invalid_argument("MixturePrior: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("MixturePrior: weights must sum to 1");
}

Prior Prior::recentered(Prior base, Subspace subspace) {
  return Prior(RecenteredPrior{std::make_shared<const Prior>(std::move(base)),
                               std::move(subspace)});
}

Prior Prior::mixture(std::vector<double> weights, std::vector<Prior> components) {
  return Prior(MixturePrior{std::move(weights), std::move(components)});
}

bool Prior::spherically_symmetric() const {
  return is<HarmonicPrior>() || is<StrawdermanPrior>() || is<NormalPrior>();
}

std::string prior_label(const Prior& prior) {
  struct Visitor {
    std::string operator()(const UniformPrior&) const { return "uniform"; }
    std::string operator()(const HarmonicPrior&) const { return "harmonic"; }
    std::string operator()(const StrawdermanPrior& s) const {
      return "strawderman(a=" + num(s.a) + ",v0=" + num(s.v0) + ")";
    }
    std::string operator()(const NormalPrior& n) const {
      return "normal(nu=" + num(n.nu) + ")";
    }
    std::string operator()(const RecenteredPrior& r) const {
      return prior_label(*r.base) + "@" + subspace_label(r.subspace);
    }
    std::string operator()(const MixturePrior& m) const {
      std::string out = "mixture(";
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        if (i) out += ",";
        out += prior_label(m.components[i]) + ":" + num(m.weights[i]);
      }
      return out + ")";
    }
  };
  return std::visit(Visitor{}, prior.variant());
}

}  // namespace shrinklab
