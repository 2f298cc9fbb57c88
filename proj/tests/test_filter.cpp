#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mechsim/filter.hpp"
#include "oracles.hpp"

using namespace mechsim;

namespace {

InterleavedStream stream_1d(const std::vector<double>& eta, const std::vector<double>& xi) {
  InterleavedStream s;
  s.agent = 0;
  for (size_t i = 0; i < eta.size(); ++i) {
    s.states.push_back((Vector(1) << eta[i]).finished());
    s.gradients.push_back((Vector(1) << xi[i]).finished());
    s.origin.push_back(-1);
  }
  return s;
}

// random (state, gradient) samples of one convex quadratic
InterleavedStream quadratic_stream(int dim, int length, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = g(rng);
  Matrix Q = A.transpose() * A + 0.3 * Matrix::Identity(dim, dim);
  Vector b = Vector::Random(dim);
  InterleavedStream s;
  s.agent = 0;
  for (int t = 0; t < length; ++t) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x(i) = 2.0 * g(rng);
    s.states.push_back(x);
    s.gradients.push_back(Q * x + b);
    s.origin.push_back(-1);
  }
  return s;
}

std::vector<SequenceTrace> tiny_traces(int agents, int k_f) {
  // hand-built traces with distinguishable payloads for order checks
  std::vector<SequenceTrace> traces;
  auto fill = [&](int excluded) {
    SequenceTrace t;
    t.excluded = excluded;
    t.k_f = k_f;
    for (int i = 0; i < agents; ++i)
      if (i != excluded) t.participants.push_back(i);
    t.states.resize(k_f + 1);
    t.gradients.resize(k_f + 1);
    for (int k = 0; k <= k_f; ++k)
      for (int i : t.participants) {
        t.states[k][i] = (Vector(1) << 100.0 * excluded + 10.0 * i + k).finished();
        t.gradients[k][i] = (Vector(1) << -(100.0 * excluded + 10.0 * i + k)).finished();
      }
    return t;
  };
  traces.push_back(fill(-1));
  for (int j = 0; j < agents; ++j) traces.push_back(fill(j));
  return traces;
}

}  // namespace

TEST_CASE("interleave: social first, then sequences by ascending excluded agent") {
  auto traces = tiny_traces(3, 2);
  auto s = interleave(traces, 1, 1, 2);
  REQUIRE(s.size() == 3 * 2);  // I * (k_f - k_s + 1)
  CHECK(s.origin == std::vector<int>{-1, 0, 2, -1, 0, 2});
  CHECK(s.states[0](0) == -100.0 + 10.0 + 1);  // social, agent 1, step 1
  CHECK(s.states[1](0) == 0.0 + 10.0 + 1);     // sequence excluding 0
  CHECK(s.states[2](0) == 200.0 + 10.0 + 1);   // sequence excluding 2
  CHECK(s.gradients[3](0) == -(-100.0 + 10.0 + 2));
}

TEST_CASE("interleave: two agents, single step") {
  auto traces = tiny_traces(2, 3);
  auto s = interleave(traces, 0, 3, 3);
  REQUIRE(s.size() == 2);
  CHECK(s.origin == std::vector<int>{-1, 1});
}

TEST_CASE("interleave: missing data is an error") {
  auto traces = tiny_traces(2, 3);
  CHECK_THROWS(interleave(traces, 0, 2, 5));            // beyond recorded steps
  CHECK_THROWS(interleave(traces, 0, 3, 2));            // inverted window
  traces.erase(traces.begin());                         // drop the social run
  CHECK_THROWS(interleave(traces, 0, 1, 2));
}

TEST_CASE("filter: single element passes through") {
  auto s = stream_1d({0.7}, {-2.0});
  auto fs = filter_stream(s);
  CHECK(fs.repair_magnitude == 0.0);
  CHECK(fs.repaired[0](0) == -2.0);
  CHECK(fs.passed_through[0] == 1);
}

TEST_CASE("filter: textbook violating pair is repaired to the boundary") {
  // gradient 1 at state 0, then gradient 0 at state 1: a decreasing slope
  auto s = stream_1d({0.0, 1.0}, {1.0, 0.0});
  auto fs = filter_stream(s);
  CHECK(fs.passed_through[0] == 1);
  CHECK(fs.passed_through[1] == 0);
  CHECK(fs.repaired[1](0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fs.repair_magnitude == doctest::Approx(1.0).epsilon(1e-9));
  auto ref = oracles::reference_filter_1d({0.0, 1.0}, {1.0, 0.0});
  REQUIRE(!ref.empty());
  CHECK(fs.repaired[1](0) == doctest::Approx(ref[1]).epsilon(1e-6));
}

TEST_CASE("filter: quadratic-sampled streams pass through exactly") {
  std::mt19937 rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    auto s = quadratic_stream(1 + rep % 3, 12, rng);
    auto fs = filter_stream(s);
    CHECK(fs.repair_magnitude == 0.0);
    for (int t = 0; t < s.size(); ++t) {
      CHECK(fs.passed_through[t] == 1);
      CHECK(fs.repaired[t] == s.gradients[t]);  // bitwise
    }
  }
}

TEST_CASE("filter: repaired 1-D streams match the independent reference") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    int len = 3 + rep % 4;
    std::vector<double> eta(len), xi(len);
    for (int t = 0; t < len; ++t) {
      eta[t] = u(rng);
      xi[t] = 2.0 * eta[t];  // consistent base: gradient of x^2
    }
    xi[1 + rep % (len - 1)] += (rep % 2 ? 3.0 : -3.0);  // inject a violation
    auto fs = filter_stream(stream_1d(eta, xi));
    auto ref = oracles::reference_filter_1d(eta, xi);
    REQUIRE(!ref.empty());
    for (int t = 0; t < len; ++t) CHECK(fs.repaired[t](0) == doctest::Approx(ref[t]).epsilon(1e-4));
  }
}

TEST_CASE("filter: repaired output is cyclically monotone") {
  std::mt19937 rng(47);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    int dim = 1 + rep % 2;
    auto s = quadratic_stream(dim, 10, rng);
    for (int hit = 0; hit < 3; ++hit) {
      int t = 1 + rep % 9;
      for (int c = 0; c < dim; ++c) s.gradients[t](c) += 4.0 * g(rng);
    }
    auto fs = filter_stream(s);
    double worst = oracles::worst_cycle_sum(s.states, fs.repaired);
    CHECK(worst <= s.size() * 1e-8);
  }
}

TEST_CASE("filter: repair accumulates monotonically and sums the steps") {
  auto s = stream_1d({0.0, 1.0, 0.5, 2.0}, {1.0, 0.0, 3.0, -1.0});
  auto fs = filter_stream(s);
  double acc = 0.0;
  for (double r : fs.step_repair) {
    CHECK(r >= 0.0);
    acc += r;
  }
  CHECK(fs.repair_magnitude == doctest::Approx(acc));
  CHECK(fs.repair_magnitude > 0.0);
}

TEST_CASE("filter: determinism") {
  std::mt19937 rng(53);
  auto s = quadratic_stream(2, 15, rng);
  s.gradients[7](0) += 5.0;
  auto a = filter_stream(s), b = filter_stream(s);
  for (int t = 0; t < s.size(); ++t) CHECK(a.repaired[t] == b.repaired[t]);
  CHECK(a.repair_magnitude == b.repair_magnitude);
}

TEST_CASE("consistency: shifted copies of one function agree") {
  // identical gradients tagged as if from different sequences: constants never
  // show up in gradients, so the stream stays consistent
  std::mt19937 rng(59);
  auto s = quadratic_stream(2, 8, rng);
  for (int t = 0; t < s.size(); ++t) s.origin[t] = (t % 2) ? 1 : -1;
  auto v = check_consistency(s);
  CHECK(v.consistent);
  CHECK(v.repair_magnitude == 0.0);
  CHECK(!v.first_violation.has_value());
}

TEST_CASE("consistency: crossing slopes from different functions are flagged") {
  // slope 2x at x=0 vs slope 4-2x at x=1: the pair forms a positive 2-cycle
  auto s = stream_1d({0.0, 1.0}, {4.0 * 0.0 + 0.0 * 2.0 + 4.0, 2.0});
  std::vector<Vector> eta = s.states, xi = s.gradients;
  CHECK(oracles::worst_cycle_sum(eta, xi) > 0.0);
  auto v = check_consistency(s);
  CHECK_FALSE(v.consistent);
  CHECK(v.repair_magnitude > 0.0);
  CHECK(v.first_violation.value() == 1);
}

TEST_CASE("consistency: empty stream is vacuously consistent") {
  InterleavedStream s;
  auto v = check_consistency(s);
  CHECK(v.consistent);
}

TEST_CASE("repair log format") {
  auto s = stream_1d({0.0, 1.0}, {1.0, 0.0});
  auto fs = filter_stream(s);
  std::ostringstream out;
  write_repair_log(out, s, fs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "agent,t,sequence,repair,pass_through");
  std::getline(in, line);
  CHECK(line == "0,0,-1,0,1");
  std::getline(in, line);
  CHECK(line.substr(0, 7) == "0,1,-1,");
  CHECK(line.back() == '0');
}
