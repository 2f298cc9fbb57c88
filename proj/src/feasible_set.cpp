#include "mechsim/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mechsim {

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw std::invalid_argument("box: bad bounds");
  for (int i = 0; i < lower.size(); ++i) {
    if (!(lower(i) <= upper(i))) throw std::invalid_argument("box: lower > upper");
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)))
      throw std::invalid_argument("box: bounds must be finite");
  }
  FeasibleSet s;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::cube(int dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

FeasibleSet& FeasibleSet::add_cap(int start, int length, double bound) {
  if (start < 0 || length < 1 || start + length > dimension())
    throw std::invalid_argument("add_cap: block out of range");
  for (const auto& c : caps_)
    if (start < c.start + c.length && c.start < start + length)
      throw std::invalid_argument("add_cap: overlapping blocks");
  double floor_sum = lower_.segment(start, length).sum();
  if (floor_sum > bound) throw std::invalid_argument("add_cap: cap below block lower bounds");
  caps_.push_back({start, length, bound});
  return *this;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) < lower_(i) - tol || x(i) > upper_(i) + tol) return false;
  for (const auto& c : caps_)
    if (x.segment(c.start, c.length).sum() > c.bound + tol) return false;
  return true;
}

namespace {

// sum of clamp(x_i - theta) over the block, non-increasing piecewise linear in theta
double block_sum(const Vector& x, const Vector& lo, const Vector& hi, int start, int len, double theta) {
  double s = 0.0;
  for (int i = start; i < start + len; ++i) s += std::clamp(x(i) - theta, lo(i), hi(i));
  return s;
}

}  // namespace

Vector FeasibleSet::project(const Vector& x) const {
  if (x.size() != dimension()) throw std::invalid_argument("project: dimension mismatch");
  Vector y = x.cwiseMax(lower_).cwiseMin(upper_);
  for (const auto& c : caps_) {
    if (y.segment(c.start, c.length).sum() <= c.bound) continue;
    // Find theta >= 0 with sum clamp(x_i - theta) = bound by walking the
    // breakpoints of the piecewise linear sum; exact within one segment.
    std::vector<double> bps = {0.0};
    for (int i = c.start; i < c.start + c.length; ++i) {
      bps.push_back(x(i) - upper_(i));
      bps.push_back(x(i) - lower_(i));
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    double theta = bps.back();
    for (size_t k = 0; k + 1 < bps.size(); ++k) {
      if (bps[k + 1] <= 0.0) continue;
      double a = std::max(bps[k], 0.0), b = bps[k + 1];
      double fa = block_sum(x, lower_, upper_, c.start, c.length, a);
      double fb = block_sum(x, lower_, upper_, c.start, c.length, b);
      if (fb > c.bound) continue;
      theta = (fa == fb) ? a : a + (fa - c.bound) * (b - a) / (fa - fb);
      break;
    }
    for (int i = c.start; i < c.start + c.length; ++i)
      y(i) = std::clamp(x(i) - theta, lower_(i), upper_(i));
  }
  return y;
}

}  // namespace mechsim
