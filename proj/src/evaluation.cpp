#include "mechsim/evaluation.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "mechsim/feasible_set.hpp"

namespace mechsim {

EvaluationFunction EvaluationFunction::quadratic(Matrix Q, Vector b, double c) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size())
    throw std::invalid_argument("quadratic: dimension mismatch");
  Matrix sym = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) throw std::invalid_argument("quadratic: Q must be positive definite");
  EvaluationFunction v;
  Quadratic q;
  q.Q = std::move(sym);
  q.b = std::move(b);
  q.mu = lo;
  q.lambda_max = hi;
  v.family_ = std::move(q);
  v.offset_ = c;
  return v;
}

EvaluationFunction EvaluationFunction::parabola(double a, double m, double c) {
  if (a <= 0.0) throw std::invalid_argument("parabola: curvature must be positive");
  Matrix Q(1, 1);
  Q(0, 0) = 2.0 * a;
  Vector b(1);
  b(0) = -2.0 * a * m;
  return quadratic(std::move(Q), std::move(b), a * m * m + c);
}

EvaluationFunction EvaluationFunction::charging_cost(ChargingCostTerms t) {
  if (t.agents < 1 || t.slots < 1) throw std::invalid_argument("charging_cost: empty fleet or horizon");
  if (t.owner < 0 || t.owner >= t.agents) throw std::invalid_argument("charging_cost: owner out of range");
  if (t.demand.size() != t.slots) throw std::invalid_argument("charging_cost: demand length != slots");
  if (t.alpha <= 0.0 || t.beta <= 0.0 || t.degradation <= 0.0 || t.delta_t <= 0.0)
    throw std::invalid_argument("charging_cost: weights must be positive");
  EvaluationFunction v;
  v.family_ = std::move(t);
  return v;
}

EvaluationFunction EvaluationFunction::shifted(double c) const {
  if (is_empty()) throw std::domain_error("non-participant has no value");
  EvaluationFunction v = *this;
  v.offset_ += c;
  return v;
}

EvaluationFunction::Kind EvaluationFunction::kind() const {
  switch (family_.index()) {
    case 1: return Kind::quadratic;
    case 2: return Kind::charging;
    default: return Kind::empty;
  }
}

int EvaluationFunction::dimension() const {
  if (auto* q = std::get_if<Quadratic>(&family_)) return static_cast<int>(q->Q.rows());
  if (auto* c = std::get_if<ChargingCostTerms>(&family_)) return c->agents * c->slots;
  return 0;
}

double EvaluationFunction::value(const Vector& x) const {
  if (x.size() != dimension() || is_empty()) {
    if (is_empty()) throw std::domain_error("non-participant has no value");
    throw std::invalid_argument("value: dimension mismatch");
  }
  if (auto* q = std::get_if<Quadratic>(&family_))
    return 0.5 * x.dot(q->Q * x) + q->b.dot(x) + offset_;
  const auto& c = std::get<ChargingCostTerms>(family_);
  const int n = c.slots;
  double own_energy = 0.0, wear = 0.0, congestion = 0.0;
  for (int t = 0; t < n; ++t) {
    double xit = x(c.owner * n + t);
    wear += c.degradation * xit * xit;
    own_energy += c.delta_t * xit;
    double load = c.demand(t);
    for (int j = 0; j < c.agents; ++j) load += x(j * n + t);
    congestion += load * load;
  }
  double deficit = own_energy - c.target;
  return wear + c.alpha * deficit * deficit + (c.beta / c.agents) * congestion + c.base + c.gamma + offset_;
}

Vector EvaluationFunction::gradient(const Vector& x) const {
  if (x.size() != dimension() || is_empty()) {
    if (is_empty()) throw std::domain_error("non-participant has no value");
    throw std::invalid_argument("gradient: dimension mismatch");
  }
  if (auto* q = std::get_if<Quadratic>(&family_)) return q->Q * x + q->b;
  const auto& c = std::get<ChargingCostTerms>(family_);
  const int n = c.slots;
  Vector g = Vector::Zero(x.size());
  double own_energy = 0.0;
  for (int t = 0; t < n; ++t) own_energy += c.delta_t * x(c.owner * n + t);
  double deficit_pull = 2.0 * c.alpha * (own_energy - c.target) * c.delta_t;
  for (int t = 0; t < n; ++t) {
    double load = c.demand(t);
    for (int j = 0; j < c.agents; ++j) load += x(j * n + t);
    double shared = 2.0 * (c.beta / c.agents) * load;
    for (int j = 0; j < c.agents; ++j) g(j * n + t) += shared;
    g(c.owner * n + t) += 2.0 * c.degradation * x(c.owner * n + t) + deficit_pull;
  }
  return g;
}

double EvaluationFunction::strong_convexity() const {
  if (auto* q = std::get_if<Quadratic>(&family_)) return q->mu;
  if (auto* c = std::get_if<ChargingCostTerms>(&family_))
    return 2.0 * c->degradation + 2.0 * c->beta / c->agents;
  throw std::domain_error("non-participant has no value");
}

double EvaluationFunction::smoothness() const {
  if (auto* q = std::get_if<Quadratic>(&family_)) return q->lambda_max;
  if (auto* c = std::get_if<ChargingCostTerms>(&family_))
    return 2.0 * c->degradation + 2.0 * c->alpha * c->slots * c->delta_t * c->delta_t + 2.0 * c->beta;
  throw std::domain_error("non-participant has no value");
}

double EvaluationFunction::gradient_bound(const FeasibleSet& X) const {
  // ||g(x)|| <= ||g(center)|| + lambda_max * ||x - center|| over the box.
  return gradient(X.center()).norm() + smoothness() * X.radius();
}

}  // namespace mechsim
