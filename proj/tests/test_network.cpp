#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>

#include "fixtures.hpp"
#include "jobsched/error.hpp"
#include "jobsched/network.hpp"

using namespace jobsched;

namespace {

// Floyd-Warshall on the raw edge list; independent of the BFS under test.
std::vector<std::vector<int>> floyd(int n, const std::vector<Edge>& edges) {
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [a, b] : edges) d[a][b] = d[b][a] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

int manhattan(const LatticePoint& a, const LatticePoint& b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

// Every node of the 5x5 grid lying on some shortest (monotone) path between
// two demand points, found by walking all monotone paths explicitly.
std::set<int> stages_on_paths(const std::vector<LatticePoint>& pts) {
  std::set<int> keep;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const int dr = pts[b].row > pts[a].row ? 1 : -1;
      const int dc = pts[b].col > pts[a].col ? 1 : -1;
      std::vector<LatticePoint> stack{pts[a]};
      while (!stack.empty()) {
        LatticePoint p = stack.back();
        stack.pop_back();
        keep.insert(p.index());
        if (p.row != pts[b].row) stack.push_back({p.row + dr, p.col});
        if (p.col != pts[b].col) stack.push_back({p.row, p.col + dc});
      }
    }
  }
  for (const auto& p : pts) keep.erase(p.index());
  return keep;
}

void check_against_oracle(const Network& net) {
  const auto oracle = floyd(net.node_count(), net.edges());
  for (int i = 0; i < net.node_count(); ++i) {
    for (int j = 0; j < net.node_count(); ++j) {
      CHECK(net.distance(i, j) == oracle[i][j]);
      if (i == j) continue;
      // next step: the lowest-numbered neighbour one hop closer
      NodeId expect = -1;
      for (NodeId u : net.neighbors(i))
        if (oracle[u][j] == oracle[i][j] - 1 && (expect < 0 || u < expect)) expect = u;
      CHECK(net.next_step(i, j) == expect);
      int hops = 0;
      for (NodeId at = i; at != j; at = net.next_step(at, j)) ++hops;
      CHECK(hops == oracle[i][j]);
    }
  }
}

}  // namespace

TEST_CASE("figure networks: distances and next steps") {
  const Network f1 = fixtures::two_one_chain();
  CHECK(f1.node_count() == 6);
  CHECK(f1.distance(0, 2) == 4);
  CHECK(f1.distance(0, 1) == 2);
  CHECK(f1.next_step(0, 2) == 3);
  CHECK(f1.max_stage_distance() == 3);

  const Network f2 = fixtures::pair_via_stage();
  CHECK(f2.distance(0, 1) == 2);
  CHECK(f2.next_step(2, 0) == 0);
  for (int i = 0; i < f2.node_count(); ++i) CHECK(f2.distance(i, i) == 0);

  const Network f3 = fixtures::four_by_four();
  CHECK(f3.node_count() == 12);
  CHECK(f3.neighbors(8).size() == 5);  // leftmost stage: 4 points + next stage
  CHECK(f3.distance(0, 4) == 5);
  CHECK(f3.distance(0, 3) == 2);
  for (const Network* n : {&f1, &f2, &f3}) check_against_oracle(*n);
}

TEST_CASE("distance matrix is symmetric and obeys the triangle inequality") {
  const Network f3 = fixtures::four_by_four();
  for (int a = 0; a < f3.node_count(); ++a)
    for (int b = 0; b < f3.node_count(); ++b) {
      CHECK(f3.distance(a, b) == f3.distance(b, a));
      for (int c = 0; c < f3.node_count(); ++c)
        CHECK(f3.distance(a, c) <= f3.distance(a, b) + f3.distance(b, c));
    }
}

TEST_CASE("two-cluster construction") {
  const Topology t = build_two_cluster(2, 1, 3);
  CHECK(t.demand_count == 3);
  CHECK(t.node_count == 6);
  REQUIRE(t.clusters.size() == 2);
  CHECK(t.clusters[0] == std::vector<NodeId>{0, 1});
  CHECK(t.clusters[1] == std::vector<NodeId>{2});
  CHECK_THROWS_AS(build_two_cluster(0, 1, 1), Error);
  CHECK_THROWS_AS(build_two_cluster(1, 1, 0), Error);
}

TEST_CASE("construction errors") {
  Topology broken;
  broken.node_count = 3;
  broken.demand_count = 2;
  broken.edges = {{0, 2}};
  CHECK_THROWS_AS(Network(broken, fixtures::uniform_rates(2, 0.1, 0.5, 1.0), 0.3), Error);
  CHECK_THROWS_AS(all_pairs_distance(2, {{0, 0}}), Error);
  const Topology ok = build_two_cluster(1, 1, 1);
  CHECK_THROWS_AS(Network(ok, fixtures::uniform_rates(2, 0.5, 0.5, 1.0), 0.3), Error);
  CHECK_THROWS_AS(Network(ok, fixtures::uniform_rates(2, 0.1, 0.5, 1.0), 0.0), Error);
  CHECK_THROWS_AS(Network(ok, fixtures::uniform_rates(2, 0.3, 0.5, 1.0), 0.3), Error);  // budget 1.1
  const Network f2 = fixtures::pair_via_stage();
  CHECK_THROWS_AS(f2.next_step(1, 1), Error);
}

TEST_CASE("lattice examples") {
  const LatticeLayout two = build_lattice({{1, 1}, {1, 3}});
  CHECK(two.topology.node_count - two.topology.demand_count == 1);
  CHECK(two.coords[2] == LatticePoint{1, 2});
  const Network n2(two.topology, fixtures::uniform_rates(2, 0.1, 0.5, 1.0), 0.3);
  CHECK(n2.distance(0, 1) == 2);

  const LatticeLayout diag = build_lattice({{1, 1}, {3, 3}});
  const Network nd(diag.topology, fixtures::uniform_rates(2, 0.1, 0.5, 1.0), 0.3);
  CHECK(nd.distance(0, 1) == 4);
  CHECK(nd.stage_count() == 7);  // the 3x3 box minus its two corners
  check_against_oracle(nd);

  // Demand points renumber in lattice-index order.
  const LatticeLayout order = build_lattice({{5, 5}, {1, 2}});
  CHECK(order.coords[0] == LatticePoint{1, 2});
  CHECK(order.coords[1] == LatticePoint{5, 5});
  CHECK_THROWS_AS(build_lattice({{1, 1}}), Error);
  CHECK_THROWS_AS(build_lattice({{1, 1}, {1, 1}}), Error);
}

TEST_CASE("random lattices keep Manhattan distances and only path stages") {
  RandomStream rng(2024);
  for (int draw = 0; draw < 200; ++draw) {
    const int d = rng.uniform_int(2, 8);
    const LatticeLayout lay = build_random_lattice(rng, d);
    const Network net(lay.topology, fixtures::uniform_rates(d, 0.01, 0.5, 1.0), 0.3);
    std::vector<LatticePoint> pts(lay.coords.begin(), lay.coords.begin() + d);
    for (int a = 1; a < d; ++a) CHECK(lay.coords[a - 1].index() < lay.coords[a].index());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) CHECK(net.distance(a, b) == manhattan(pts[a], pts[b]));
    std::set<int> kept;
    for (int k = d; k < net.node_count(); ++k) kept.insert(lay.coords[k].index());
    CHECK(kept == stages_on_paths(pts));
    if (draw < 20) check_against_oracle(net);
  }
}

TEST_CASE("complete graph") {
  const Network k4(build_complete(4), fixtures::uniform_rates(4, 0.05, 0.5, 1.0), 0.3);
  CHECK(k4.is_complete());
  CHECK(k4.stage_count() == 0);
  CHECK(k4.max_stage_distance() == 0);
  CHECK_FALSE(fixtures::pair_via_stage().is_complete());
}

TEST_CASE("cached scalars") {
  const Network f1 = fixtures::two_one_chain(0.1, 0.5, 0.4);
  double rho = 0.0;
  for (const auto& r : f1.rates()) rho += r.lambda / r.mu;
  CHECK(f1.rho() == rho);
  CHECK(f1.total_arrival_rate() == doctest::Approx(0.3));
  CHECK(f1.eta() == doctest::Approx(0.4 / 0.3));
  CHECK(f1.rate_budget() == doctest::Approx(0.8));
}
