#include "mechsim/projection_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mechsim {

namespace {

double max_violation(const Vector& x, const Matrix& A, const Vector& b) {
  if (A.rows() == 0) return 0.0;
  return (A * x - b).maxCoeff();
}

}  // namespace

// Dual active-set projection: start from the target (the unconstrained
// optimum), repeatedly pin the most violated constraint, project onto the
// active equalities via the Gram pseudo-inverse, and release constraints whose
// multipliers go negative. Stationarity xi = target - A' lambda holds by
// construction at every accepted iterate.
Vector solve_projection_qp(const Vector& target, const std::vector<HalfSpace>& constraints) {
  const int n = static_cast<int>(target.size());
  // Normalize rows; constant rows are either vacuous or certify infeasibility.
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (const auto& h : constraints) {
    if (h.a.size() != n)
      throw std::invalid_argument("projection QP: constraint dimension mismatch");
    double na = h.a.norm();
    if (na == 0.0) {
      if (h.b < 0.0)
        throw std::runtime_error("projection QP: infeasible constraint 0 <= " +
                                 std::to_string(h.b));
      continue;
    }
    Vector dir = h.a / na;
    double bound = h.b / na;
    // parallel directions collapse to the tightest bound
    bool merged = false;
    for (size_t k = 0; k < rows.size(); ++k)
      if ((rows[k] - dir).norm() < 1e-12) {
        rhs[k] = std::min(rhs[k], bound);
        merged = true;
        break;
      }
    if (!merged) {
      rows.push_back(std::move(dir));
      rhs.push_back(bound);
    }
  }
  if (rows.empty()) return target;
  const int m = static_cast<int>(rows.size());
  Matrix A(m, n);
  Vector b(m);
  for (int i = 0; i < m; ++i) {
    A.row(i) = rows[i];
    b(i) = rhs[i];
  }

  if (max_violation(target, A, b) <= 0.0) return target;  // exact pass-through

  const double scale = std::max(1.0, target.norm());
  const double feas_tol = 1e-9 * scale;
  const double lam_tol = 1e-10 * scale;

  std::vector<int> active;
  Vector xi = target;
  Vector lambda = Vector::Zero(m);
  const int cap = 60 * (m + n) + 200;
  for (int it = 0;; ++it) {
    if (it > cap) throw std::runtime_error("projection QP: iteration cap exceeded");
    if (!active.empty()) {
      Matrix As(active.size(), n);
      Vector bs(active.size());
      for (size_t k = 0; k < active.size(); ++k) {
        As.row(k) = A.row(active[k]);
        bs(k) = b(active[k]);
      }
      Matrix gram = As * As.transpose();
      Vector lam = gram.completeOrthogonalDecomposition().solve(As * target - bs);
      // release the most negative multiplier before trusting the projection
      int drop = -1;
      double worst = -lam_tol;
      for (size_t k = 0; k < active.size(); ++k)
        if (lam(k) < worst) {
          worst = lam(k);
          drop = static_cast<int>(k);
        }
      if (drop >= 0) {
        active.erase(active.begin() + drop);
        continue;
      }
      xi = target - As.transpose() * lam;
      lambda.setZero();
      for (size_t k = 0; k < active.size(); ++k) lambda(active[k]) = lam(k);
      // active equalities unsatisfiable with nonnegative multipliers: there is
      // no point this side of every pinned hyperplane
      double active_resid = (As * xi - bs).cwiseAbs().maxCoeff();
      if (active_resid > feas_tol)
        throw std::runtime_error("projection QP: infeasible system, active residual " +
                                 std::to_string(active_resid));
    }
    Vector slack = A * xi - b;
    int worst_row = -1;
    double worst = feas_tol;
    for (int i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (slack(i) > worst) {
        worst = slack(i);
        worst_row = i;
      }
    }
    if (worst_row < 0) break;
    active.push_back(worst_row);
  }

  if (max_violation(xi, A, b) > 1e-8 * scale)
    throw std::runtime_error("projection QP: feasibility tolerance exceeded, max violation " +
                             std::to_string(max_violation(xi, A, b)));
  double kkt = (xi - target + A.transpose() * lambda).norm();
  if (kkt > 1e-6 * scale)
    throw std::runtime_error("projection QP: stationarity residual " + std::to_string(kkt));
  return xi;
}

}  // namespace mechsim
