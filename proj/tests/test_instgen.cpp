#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jobsched/error.hpp"
#include "jobsched/instgen.hpp"
#include "jobsched/io.hpp"

using namespace jobsched;

namespace {

double recorded_rho(const InstanceSpec& s) {
  double r = 0;
  for (const auto& x : s.rates) r += x.lambda / x.mu;
  return r;
}

void check_invariants(const InstanceSpec& s) {
  const Network net = s.network();
  double lam = 0, peak = 0;
  for (const auto& r : s.rates) {
    CHECK(r.lambda < r.mu);
    CHECK(r.lambda > 0);
    CHECK(round_sig2(r.lambda) == r.lambda);
    CHECK(round_sig2(r.mu) == r.mu);
    lam += r.lambda;
    peak = std::max(peak, r.mu);
  }
  CHECK(round_sig2(s.tau) == s.tau);
  CHECK(s.delta == doctest::Approx(std::min(1.0, 1.0 / (lam + std::max(peak, s.tau)))));
  CHECK(net.rate_budget() <= 1.0 + 1e-12);
  CHECK(net.rho() < 1.0);
  CHECK(s.target_rho >= 0.1);
  CHECK(s.target_rho < 0.9);
  CHECK(s.generator == "jobsched-gen/1");
}

}  // namespace

TEST_CASE("two-significant-figure rounding") {
  CHECK(round_sig2(0.0) == 0.0);
  CHECK(round_sig2(0.123456) == 0.12);
  CHECK(round_sig2(0.0987) == 0.099);
  CHECK(round_sig2(0.995) == doctest::Approx(1.0));
  CHECK(round_sig2(3.14159) == 3.1);
  CHECK(round_sig2(0.00456) == 0.0046);
  CHECK(round_sig2(round_sig2(0.73321)) == round_sig2(0.73321));
}

TEST_CASE("two-cluster instances") {
  RandomStream rng(101);
  double worst = 0;
  int eta_low = 0;
  const int draws = 10'000;
  for (int k = 0; k < draws; ++k) {
    const InstanceSpec s = generate_two_cluster(rng);
    CHECK(s.layout.kind == LayoutTag::Kind::TwoCluster);
    CHECK(s.layout.d1 >= 1);
    CHECK(s.layout.d1 <= 4);
    CHECK(s.layout.d2 >= 1);
    CHECK(s.layout.d2 <= 4);
    CHECK(s.layout.n >= 1);
    CHECK(s.layout.n <= 6);
    CHECK(s.topology.demand_count == s.layout.d1 + s.layout.d2);
    CHECK(s.topology.clusters.size() == 2);
    if (k < 1000) {
      check_invariants(s);
      worst = std::max(worst, std::abs(recorded_rho(s) - s.target_rho));
    }
    eta_low += s.target_eta < 1.0;
    CHECK(s.target_eta >= 0.1);
    CHECK(s.target_eta < 10.0);
  }
  CHECK(worst < 0.05);
  CHECK(std::abs(eta_low / double(draws) - 0.5) < 0.03);
}

TEST_CASE("lattice instances") {
  RandomStream rng(103);
  for (int k = 0; k < 500; ++k) {
    const InstanceSpec s = generate_lattice(rng);
    CHECK(s.layout.kind == LayoutTag::Kind::Lattice);
    const int d = s.topology.demand_count;
    CHECK(d >= 2);
    CHECK(d <= 8);
    check_invariants(s);
    const Network net = s.network();
    for (NodeId v = d; v < net.node_count(); ++v) CHECK_FALSE(net.is_demand(v));
  }
}

TEST_CASE("small two-cluster instances respect the demand cap") {
  RandomStream rng(107);
  for (int k = 0; k < 300; ++k) {
    const InstanceSpec s = generate_two_cluster_small(rng, 3);
    CHECK(s.topology.demand_count <= 3);
    check_invariants(s);
  }
  CHECK_THROWS_AS(generate_two_cluster_small(rng, 1), Error);
}

TEST_CASE("determinism and JSON round trip") {
  for (const char* layout : {"two-cluster", "lattice"}) {
    for (std::uint64_t seed : {1u, 42u, 9999u}) {
      const InstanceSpec a = generate_instance(layout, seed);
      const InstanceSpec b = generate_instance(layout, seed);
      const std::string ja = instance_to_json(a);
      CHECK(ja == instance_to_json(b));
      CHECK(a.seed == seed);
      const InstanceSpec back = instance_from_json(ja);
      CHECK(instance_to_json(back) == ja);
      const Network na = a.network(), nb = back.network();
      CHECK(na.node_count() == nb.node_count());
      for (NodeId i = 0; i < na.demand_count(); ++i) {
        CHECK(na.lambda(i) == nb.lambda(i));
        CHECK(na.mu(i) == nb.mu(i));
      }
      for (NodeId u = 0; u < na.node_count(); ++u)
        for (NodeId v = 0; v < na.node_count(); ++v) CHECK(na.distance(u, v) == nb.distance(u, v));
    }
  }
  CHECK(instance_to_json(generate_instance("lattice", 1)) != instance_to_json(generate_instance("lattice", 2)));
  CHECK_THROWS_AS(generate_instance("ring", 1), Error);
}

TEST_CASE("hand-written instances") {
  const std::string text = R"({"nodes": 3, "edges": [[1, 3], [2, 3]],
    "demand": [{"id": 2, "lambda": 0.1, "mu": 0.5, "cost": 2},
               {"id": 1, "lambda": 0.05, "mu": 0.4, "cost": 1}],
    "tau": 0.3})";
  const InstanceSpec s = instance_from_json(text);
  const Network net = s.network();
  CHECK(net.demand_count() == 2);
  CHECK(net.lambda(0) == 0.05);
  CHECK(net.cost(1) == 2.0);
  CHECK(net.distance(0, 1) == 2);
  CHECK(s.layout.n == 1);

  CHECK_THROWS_AS(instance_from_json("{"), Error);
  CHECK_THROWS_AS(instance_from_json(R"({"nodes": 2, "edges": [[1, 3]], "demand": [], "tau": 1})"), Error);
  CHECK_THROWS_AS(instance_from_json(
                      R"({"nodes": 2, "edges": [[1, 2]], "demand": [{"id": 3, "lambda": 0.1, "mu": 0.5, "cost": 1}], "tau": 0.5})"),
                  Error);
  CHECK_THROWS_AS(instance_from_json(R"({"nodes": 2, "edges": [[1, 2]], "tau": 0.5})"), Error);
  // parses, but the rates are not a valid model
  const InstanceSpec bad = instance_from_json(
      R"({"nodes": 2, "edges": [[1, 2]], "demand": [{"id": 1, "lambda": 0.6, "mu": 0.5, "cost": 1}, {"id": 2, "lambda": 0.1, "mu": 0.5, "cost": 1}], "tau": 0.5})");
  CHECK_THROWS_AS(bad.network(), Error);
}
