#pragma once

#include <variant>

#include "mechsim/types.hpp"

namespace mechsim {

class FeasibleSet;

/// Parameters of one agent's charging cost over the joint schedule of a fleet.
/// The decision variable is x in R^{agents*slots}, agent j's slot t sitting at
/// index j*slots + t.
struct ChargingCostTerms {
  int agents = 0;
  int slots = 0;
  int owner = 0;          // whose cost this is
  double delta_t = 1.0;   // hours per slot
  double degradation = 0.002;
  double alpha = 0.0;     // weight on missing the energy target
  double target = 0.0;    // energy the owner's battery still accepts
  double beta = 0.0;      // congestion weight (shared)
  double base = 200.0;    // fixed cost
  double gamma = 0.0;     // per-agent additive constant
  Vector demand;          // background load per slot
};

/// A strongly convex cost/evaluation function with value and gradient oracles.
/// The distinguished empty function models non-participation; evaluating it is
/// an error. Constant shifts fold into a per-function offset, so shifting never
/// changes gradients.
class EvaluationFunction {
 public:
  enum class Kind { empty, quadratic, charging };

  EvaluationFunction() = default;  // empty

  /// 0.5 x'Qx + b'x + c with Q symmetric positive definite.
  static EvaluationFunction quadratic(Matrix Q, Vector b, double c = 0.0);
  /// Convenience 1-D quadratic a*(x - m)^2 + c.
  static EvaluationFunction parabola(double a, double m, double c = 0.0);
  static EvaluationFunction charging_cost(ChargingCostTerms terms);
  static EvaluationFunction empty() { return EvaluationFunction(); }

  /// Same function plus a constant: value(x) + c, gradient unchanged.
  EvaluationFunction shifted(double c) const;

  Kind kind() const;
  bool is_empty() const { return kind() == Kind::empty; }
  int dimension() const;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  /// Strong-convexity modulus. For charging costs the modulus is certified for
  /// perturbations inside the owner's own coordinate block (the cross-agent
  /// congestion coupling is only positive semi-definite).
  double strong_convexity() const;
  /// Upper bound on the largest Hessian eigenvalue.
  double smoothness() const;
  /// Bound on the gradient norm over a bounded feasible set.
  double gradient_bound(const FeasibleSet& X) const;

  double offset() const { return offset_; }

 private:
  struct Empty {};
  struct Quadratic {
    Matrix Q;
    Vector b;
    double mu = 0.0;
    double lambda_max = 0.0;
  };
  std::variant<Empty, Quadratic, ChargingCostTerms> family_;
  double offset_ = 0.0;
};

}  // namespace mechsim
