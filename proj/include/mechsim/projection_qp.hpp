#pragma once

#include <utility>
#include <vector>

#include "mechsim/types.hpp"

namespace mechsim {

/// One linear inequality a'x <= b.
struct HalfSpace {
  Vector a;
  double b = 0.0;
};

/// Euclidean projection of target onto {x : a_i'x <= b_i for all i}.
/// Solved as a least-distance program via Lawson-Hanson NNLS. The result is
/// feasible within 1e-8 and satisfies KKT stationarity within 1e-6; violation
/// of either contract throws.
Vector solve_projection_qp(const Vector& target, const std::vector<HalfSpace>& constraints);

}  // namespace mechsim
