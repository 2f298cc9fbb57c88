#include "mechsim/filter.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mechsim/projection_qp.hpp"

namespace mechsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPassSlack = 1e-9;
}  // namespace

InterleavedStream interleave(const std::vector<SequenceTrace>& traces, int agent, int k_s,
                             int k_f) {
  if (k_s < 0 || k_s > k_f) throw std::invalid_argument("interleave: bad step window");
  const SequenceTrace* social = nullptr;
  std::vector<const SequenceTrace*> others;  // ascending excluded id
  for (const auto& t : traces) {
    if (t.excluded == -1)
      social = &t;
    else if (t.excluded != agent)
      others.push_back(&t);
  }
  if (!social) throw std::invalid_argument("interleave: social sequence missing");
  std::sort(others.begin(), others.end(),
            [](auto* a, auto* b) { return a->excluded < b->excluded; });

  InterleavedStream s;
  s.agent = agent;
  auto push = [&](const SequenceTrace& t, int k) {
    if (k > t.k_f || !t.states[k].count(agent))
      throw std::invalid_argument("interleave: agent data missing from a sequence");
    s.states.push_back(t.states[k].at(agent));
    s.gradients.push_back(t.gradients[k].at(agent));
    s.origin.push_back(t.excluded);
  };
  for (int k = k_s; k <= k_f; ++k) {
    push(*social, k);
    for (auto* t : others) push(*t, k);
  }
  return s;
}

FilterState filter_stream(const InterleavedStream& stream) {
  const int T = stream.size();
  FilterState fs;
  fs.repaired.reserve(T);
  fs.step_repair.reserve(T);
  fs.passed_through.reserve(T);
  // F(tau, m): largest total value over chains tau -> ... -> m, where an edge
  // u -> w contributes xi-tilde^u . (eta^w - eta^u). 0-indexed, -inf = no chain.
  Matrix F = Matrix::Constant(T, T, kNegInf);

  for (int t = 0; t < T; ++t) {
    const Vector& eta_t = stream.states[t];
    const Vector& xi_t = stream.gradients[t];
    F(t, t) = 0.0;

    // best chain value tau -> ... -> t, over predecessors m of t
    std::vector<double> into_t(t, kNegInf);
    for (int tau = 0; tau < t; ++tau) {
      double best = kNegInf;
      for (int m = 0; m < t; ++m)
        if (F(tau, m) != kNegInf)
          best = std::max(best, F(tau, m) + fs.repaired[m].dot(eta_t - stream.states[m]));
      into_t[tau] = best;
    }

    // consistency of the new gradient: xi . (eta^tau - eta^t) + chain(tau->t) <= 0
    std::vector<HalfSpace> constraints;
    double worst = kNegInf;
    for (int tau = 0; tau < t; ++tau) {
      if (into_t[tau] == kNegInf) continue;
      Vector a = stream.states[tau] - eta_t;
      double b = -into_t[tau];
      worst = std::max(worst, xi_t.dot(a) - b);
      if (a.norm() > 0.0)
        constraints.push_back({std::move(a), b});
      else if (b < -kPassSlack)
        throw std::runtime_error("filter: inconsistent revisit of an identical state");
    }

    if (worst <= kPassSlack) {
      fs.repaired.push_back(xi_t);  // untouched, bit for bit
      fs.step_repair.push_back(0.0);
      fs.passed_through.push_back(1);
    } else {
      Vector fixed = solve_projection_qp(xi_t, constraints);
      fs.step_repair.push_back((fixed - xi_t).squaredNorm());
      fs.repaired.push_back(std::move(fixed));
      fs.passed_through.push_back(0);
      fs.repair_magnitude += fs.step_repair.back();
    }

    // extend the chain table with node t
    const Vector& xi_rep = fs.repaired[t];
    std::vector<double> from_t(t, kNegInf);
    for (int m = 0; m < t; ++m) {
      double best = kNegInf;
      for (int tau = 0; tau < t; ++tau)
        if (F(tau, m) != kNegInf)
          best = std::max(best, xi_rep.dot(stream.states[tau] - eta_t) + F(tau, m));
      from_t[m] = best;
    }
    for (int tau = 0; tau < t; ++tau) F(tau, t) = into_t[tau];
    for (int m = 0; m < t; ++m) F(t, m) = from_t[m];
    for (int tau = 0; tau < t; ++tau)
      for (int m = 0; m < t; ++m)
        if (into_t[tau] != kNegInf && from_t[m] != kNegInf)
          F(tau, m) = std::max(F(tau, m), into_t[tau] + from_t[m]);
  }
  return fs;
}

ConsistencyVerdict check_consistency(const InterleavedStream& stream) {
  ConsistencyVerdict v;
  if (stream.size() == 0) return v;  // vacuously consistent
  FilterState fs = filter_stream(stream);
  v.repair_magnitude = fs.repair_magnitude;
  v.consistent = fs.repair_magnitude == 0.0;
  for (int t = 0; t < stream.size(); ++t)
    if (fs.step_repair[t] > 0.0) {
      v.first_violation = t;
      break;
    }
  return v;
}

void write_repair_log(std::ostream& out, const InterleavedStream& stream, const FilterState& fs) {
  out << "agent,t,sequence,repair,pass_through\n";
  char buf[64];
  for (int t = 0; t < stream.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", fs.step_repair[t]);
    out << stream.agent << ',' << t << ',' << stream.origin[t] << ',' << buf << ','
        << int(fs.passed_through[t]) << '\n';
  }
}

}  // namespace mechsim
