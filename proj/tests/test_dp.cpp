#include <doctest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "jobsched/dp.hpp"
#include "jobsched/error.hpp"
#include "jobsched/sim.hpp"

using namespace jobsched;

namespace {

// Mean of a birth-death chain capped at m: pi_k proportional to p^k.
double truncated_mm1_mean(double lambda, double mu, int m) {
  double num = 0, den = 0, w = 1;
  for (int k = 0; k <= m; ++k, w *= lambda / mu) num += k * w, den += w;
  return num / den;
}

// Exact long-run cost of a stationary policy on the capped chain, from the
// stationary distribution found by power iteration. Kernel rebuilt from the
// model module with the cap applied here.
template <typename Decide>
double evaluate_policy(const Network& net, int m, Decide decide) {
  std::map<std::vector<int>, int> id;
  std::vector<SystemState> states;
  const int d = net.demand_count();
  for (NodeId v = 0; v < net.node_count(); ++v) {
    std::vector<int> x(d, 0);
    while (true) {
      auto k = x;
      k.push_back(v);
      id[k] = static_cast<int>(states.size());
      states.push_back({v, x});
      int i = 0;
      while (i < d && x[i] == m) x[i++] = 0;
      if (i == d) break;
      ++x[i];
    }
  }
  auto key = [](const SystemState& s) { auto k = s.jobs; k.push_back(s.server); return k; };
  std::vector<std::vector<std::pair<int, double>>> rows(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const NodeId a = decide(states[s]);
    for (const auto& e : transition_distribution(net, states[s], a)) {
      SystemState next = e.next;
      bool overflow = false;
      for (int i = 0; i < d; ++i) overflow = overflow || next.jobs[i] > m;
      rows[s].push_back({id.at(key(overflow ? states[s] : next)), e.prob});
    }
  }
  std::vector<double> pi(states.size(), 1.0 / states.size()), nxt(states.size());
  for (int it = 0; it < 200000; ++it) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s)
      for (auto [t, p] : rows[s]) nxt[t] += pi[s] * p;
    double diff = 0;
    for (std::size_t s = 0; s < states.size(); ++s) diff += std::abs(nxt[s] - pi[s]);
    pi.swap(nxt);
    if (diff < 1e-13) break;
  }
  double g = 0;
  for (std::size_t s = 0; s < states.size(); ++s) g += pi[s] * step_cost(net, states[s]);
  return g;
}

}  // namespace

TEST_CASE("truncated state space") {
  const TruncatedMdp one(fixtures::single_queue(), 2);
  CHECK(one.state_count() == 3);
  CHECK(one.action_count() == 3);
  const TruncatedMdp pair(fixtures::pair_via_stage(), 1);
  CHECK(pair.state_count() == 12);
  CHECK(truncated_state_count(fixtures::two_one_chain(), 3) == 6u * 64u);
  for (std::size_t s = 0; s < pair.state_count(); ++s) CHECK(pair.index_of(pair.state_at(s)) == s);
  CHECK(pair.index_of({2, {1, 0}}) == 2 * 4 + 1);
  CHECK_THROWS_AS(TruncatedMdp(fixtures::four_by_four(), 30), Error);
  CHECK_THROWS_AS(TruncatedMdp(fixtures::single_queue(), 0), Error);
}

TEST_CASE("kernel rows and saturation") {
  const Network net = fixtures::single_queue(0.2, 0.5);
  const TruncatedMdp mdp(net, 2);
  auto entries = [&](int x) {
    std::map<std::uint32_t, double> out;
    const std::size_t a = mdp.action_begin(mdp.index_of({0, {x}}));
    for (std::size_t e = mdp.entry_begin(a); e < mdp.entry_begin(a + 1); ++e)
      out[mdp.entry_next(e)] += mdp.entry_prob(e);
    return out;
  };
  CHECK(entries(0)[1] == doctest::Approx(0.2));
  CHECK(entries(0)[0] == doctest::Approx(0.8));
  CHECK(entries(2)[1] == doctest::Approx(0.5));
  CHECK(entries(2)[2] == doctest::Approx(0.5));  // 0.3 idle plus the blocked 0.2

  for (const Network& n : {fixtures::two_one_chain(0.05, 0.3, 0.4), fixtures::pair_via_stage()}) {
    const TruncatedMdp t(n, 3);
    for (std::size_t s = 0; s < t.state_count(); ++s) {
      for (std::size_t a = t.action_begin(s); a < t.action_begin(s + 1); ++a) {
        double total = 0;
        for (std::size_t e = t.entry_begin(a); e < t.entry_begin(a + 1); ++e) total += t.entry_prob(e);
        CHECK(std::abs(total - 1.0) <= 1e-15);
      }
    }
  }
}

TEST_CASE("M/M/1 values") {
  const Network net = fixtures::single_queue(0.2, 0.5);
  for (int m : {5, 20}) {
    const DpResult r = relative_value_iteration(TruncatedMdp(net, m), 1e-10);
    CHECK(r.converged);
    CHECK(r.span < 1e-10);
    CHECK(r.g_star == doctest::Approx(truncated_mm1_mean(0.2, 0.5, m)).epsilon(1e-7));
  }
  const DpResult big = relative_value_iteration(TruncatedMdp(net, 200));
  CHECK(std::abs(big.g_star - 2.0 / 3.0) < 0.01 * 2.0 / 3.0);
  // m >= 50 / (1 - rho) suffices for half a percent
  const DpResult mid = relative_value_iteration(TruncatedMdp(net, 84));
  CHECK(std::abs(mid.g_star - 2.0 / 3.0) < 0.005 * 2.0 / 3.0);
}

TEST_CASE("trivial and scaling cases") {
  const Network idle(build_two_cluster(1, 2, 1), fixtures::uniform_rates(3, 0.0, 0.4, 1.0), 0.5);
  CHECK(std::abs(relative_value_iteration(TruncatedMdp(idle, 3)).g_star) < 1e-7);  // within the span tolerance

  const Network a(build_two_cluster(1, 1, 1), {{0.1, 0.4, 1.0}, {0.05, 0.3, 2.0}}, 0.5);
  const Network b(build_two_cluster(1, 1, 1), {{0.1, 0.4, 10.0}, {0.05, 0.3, 20.0}}, 0.5);
  const double ga = relative_value_iteration(TruncatedMdp(a, 8), 1e-9).g_star;
  const double gb = relative_value_iteration(TruncatedMdp(b, 8), 1e-8).g_star;
  CHECK(gb == doctest::Approx(10 * ga).epsilon(1e-6));

  const DpResult capped = relative_value_iteration(TruncatedMdp(a, 8), 1e-12, 3);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 3);
}

TEST_CASE("g* is nondecreasing in m") {
  const Network net = fixtures::pair_via_stage(0.12, 0.4, 0.3);
  double prev = 0;
  for (int m : {5, 10, 15}) {
    const double g = relative_value_iteration(TruncatedMdp(net, m), 1e-9).g_star;
    CHECK(g >= prev - 1e-7);
    prev = g;
  }
}

TEST_CASE("greedy policy attains g* and beats heuristics on the capped chain") {
  const Network net(build_two_cluster(1, 1, 1), {{0.08, 0.4, 1.0}, {0.05, 0.3, 1.5}}, 0.45);
  const int m = 6;
  const TruncatedMdp mdp(net, m);
  const DpResult r = relative_value_iteration(mdp, 1e-10);
  REQUIRE(r.converged);
  REQUIRE(r.greedy.size() == mdp.state_count());
  const double greedy = evaluate_policy(net, m, [&](const SystemState& s) { return r.greedy[mdp.index_of(s)]; });
  CHECK(greedy == doctest::Approx(r.g_star).epsilon(1e-6));
  const double kstop = evaluate_policy(net, m, [&](const SystemState& s) { return kstop_decide(net, s, 2).action; });
  CHECK(r.g_star <= kstop + 1e-8);
  const double stay = evaluate_policy(net, m, [&](const SystemState& s) {
    return s.server == 2 ? NodeId{0} : s.server;
  });
  CHECK(r.g_star <= stay + 1e-8);
}

TEST_CASE("greedy policy simulates to g*") {
  const Network net(build_two_cluster(1, 1, 1), {{0.08, 0.4, 1.0}, {0.05, 0.3, 1.5}}, 0.45);
  const DpResult r = relative_value_iteration(TruncatedMdp(net, 30), 1e-8);
  DpGreedyPolicy policy(net, r);
  const SimReport rep = simulate_discrete(net, policy, 5, 10'000, 1'000'000);
  CHECK(std::abs(rep.average_cost - r.g_star) < 3 * rep.std_error + 1e-3);
}

TEST_CASE("feasibility escalation") {
  FeasibilityLimits limits;
  const auto four = feasibility_escalation(fixtures::four_by_four(), limits);
  CHECK_FALSE(four.feasible);
  CHECK(four.history.empty());

  limits.state_limit = 45;  // solves m = 10..40
  const auto mm1 = feasibility_escalation(fixtures::single_queue(0.2, 0.5), limits);
  CHECK(mm1.feasible);
  CHECK(mm1.history.size() == 4);
  CHECK(std::abs(mm1.g_star - 2.0 / 3.0) < limits.epsilon);

  limits.state_limit = 15;  // one solve: increment unknown
  CHECK_FALSE(feasibility_escalation(fixtures::single_queue(0.2, 0.5), limits).feasible);

  limits.state_limit = 1'000'000;
  limits.time_limit_seconds = 0.0;  // the first solve already exceeds the budget
  const auto timed = feasibility_escalation(fixtures::single_queue(0.2, 0.5), limits);
  CHECK(timed.history.size() == 1);
  CHECK_FALSE(timed.feasible);

  FeasibilityLimits heavy;
  heavy.state_limit = 200;
  const auto sat = feasibility_escalation(fixtures::single_queue(0.49, 0.5), heavy);
  CHECK_FALSE(sat.feasible);  // truncation still bites at m = 190
}
