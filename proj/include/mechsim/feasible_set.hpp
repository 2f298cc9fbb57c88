#pragma once

#include <vector>

#include "mechsim/types.hpp"

namespace mechsim {

/// Cap on the sum of a contiguous coordinate block: sum(x[start..start+length)) <= bound.
struct BlockCap {
  int start = 0;
  int length = 0;
  double bound = 0.0;
};

/// A compact box with optional per-block budget caps, supporting exact
/// Euclidean projection (clamp composed with a water-filling step on any
/// violated capped block).
class FeasibleSet {
 public:
  FeasibleSet() = default;
  static FeasibleSet box(Vector lower, Vector upper);
  /// Uniform box [lo, hi]^dim.
  static FeasibleSet cube(int dim, double lo, double hi);

  FeasibleSet& add_cap(int start, int length, double bound);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<BlockCap>& caps() const { return caps_; }

  bool contains(const Vector& x, double tol = 1e-9) const;
  Vector project(const Vector& x) const;

  Vector center() const { return 0.5 * (lower_ + upper_); }
  double radius() const { return 0.5 * (upper_ - lower_).norm(); }

 private:
  Vector lower_, upper_;
  std::vector<BlockCap> caps_;
};

}  // namespace mechsim
