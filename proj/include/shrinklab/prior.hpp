#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "shrinklab/subspace.hpp"

namespace shrinklab {

class Prior;

struct UniformPrior {};

// pi(mu) = |mu|^{-(k-2)} in effective dimension k; marginal finite for k >= 3
struct HarmonicPrior {};

// mu | s ~ N(0, s·v0·I), s ~ (1+s)^{a-2} ds
struct StrawdermanPrior {
  double a;
  double v0;
};

struct NormalPrior {
  double nu;
};

// Spherically symmetric base translated to shrink toward an affine subspace;
// the base acts on z − P_B z in effective dimension p − dim(B).
struct RecenteredPrior {
  std::shared_ptr<const Prior> base;
  Subspace subspace;
};

struct MixturePrior {
  std::vector<double> weights;
  std::vector<Prior> components;
};

class Prior {
 public:
  using Variant = std::variant<UniformPrior, HarmonicPrior, StrawdermanPrior,
                               NormalPrior, RecenteredPrior, MixturePrior>;

  Prior(UniformPrior v) : v_(std::move(v)) {}
  Prior(HarmonicPrior v) : v_(std::move(v)) {}
  Prior(StrawdermanPrior v);
  Prior(NormalPrior v);
  Prior(RecenteredPrior v);
  Prior(MixturePrior v);

  static Prior uniform() { return Prior(UniformPrior{}); }
  static Prior harmonic() { return Prior(HarmonicPrior{}); }
  static Prior strawderman(double a, double v0) {
    return Prior(StrawdermanPrior{a, v0});
  }
  static Prior normal(double nu) { return Prior(NormalPrior{nu}); }
  static Prior recentered(Prior base, Subspace subspace);
  static Prior mixture(std::vector<double> weights, std::vector<Prior> components);

  const Variant& variant() const { return v_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }

  // true for the centered rotation-invariant families (not uniform)
  bool spherically_symmetric() const;

 private:
  Variant v_;
};

// Compact deterministic tag, used in CSV output and reports.
std::string prior_label(const Prior& prior);

}  // namespace shrinklab
