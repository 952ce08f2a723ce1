#include "jobsched/network.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <string>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

constexpr int kUnreached = -1;
constexpr double kBudgetSlack = 1e-12;

std::vector<std::vector<NodeId>> adjacency_lists(int node_count, const std::vector<Edge>& edges) {
  std::vector<std::vector<NodeId>> adj(node_count);
  for (const auto& [a, b] : edges) {
    require(a >= 0 && a < node_count && b >= 0 && b < node_count,
            "edge endpoint out of range: " + std::to_string(a) + "-" + std::to_string(b));
    require(a != b, "self-loop at node " + std::to_string(a));
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace

DistanceMatrix all_pairs_distance(int node_count, const std::vector<Edge>& edges) {
  require(node_count > 0, "network needs at least one node");
  const auto adj = adjacency_lists(node_count, edges);
  std::vector<int> hops(static_cast<std::size_t>(node_count) * node_count, kUnreached);
  std::deque<NodeId> frontier;
  for (NodeId src = 0; src < node_count; ++src) {
    int* row = &hops[static_cast<std::size_t>(src) * node_count];
    row[src] = 0;
    frontier.assign(1, src);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (NodeId w : adj[u]) {
        if (row[w] == kUnreached) {
          row[w] = row[u] + 1;
          frontier.push_back(w);
        }
      }
    }
    for (NodeId t = 0; t < node_count; ++t) {
      if (row[t] == kUnreached) {
        fail(ErrorCode::InvalidArgument, "network is disconnected: node " + std::to_string(t) +
                                             " unreachable from node " + std::to_string(src));
      }
    }
  }
  return DistanceMatrix(node_count, std::move(hops));
}

Topology build_two_cluster(int d1, int d2, int n) {
  require(d1 >= 1 && d2 >= 1 && n >= 1, "two-cluster layout needs d1, d2, n >= 1");
  Topology topo;
  const int d = d1 + d2;
  topo.demand_count = d;
  topo.node_count = d + n;
  const NodeId left_stage = d;
  const NodeId right_stage = d + n - 1;
  for (NodeId i = 0; i < d1; ++i) topo.edges.emplace_back(i, left_stage);
  for (NodeId i = d1; i < d; ++i) topo.edges.emplace_back(i, right_stage);
  for (NodeId s = d; s + 1 < d + n; ++s) topo.edges.emplace_back(s, s + 1);
  std::vector<NodeId> left(d1), right(d2);
  std::iota(left.begin(), left.end(), 0);
  std::iota(right.begin(), right.end(), d1);
  topo.clusters = {left, right};
  return topo;
}

LatticeLayout build_lattice(const std::vector<LatticePoint>& demand_points) {
  const int d = static_cast<int>(demand_points.size());
  require(d >= 2 && d <= 25, "lattice layout needs between 2 and 25 demand points");
  std::vector<bool> is_demand(25, false);
  for (const auto& p : demand_points) {
    require(p.row >= 1 && p.row <= 5 && p.col >= 1 && p.col <= 5, "lattice point out of range");
    require(!is_demand[p.index()], "duplicate lattice demand point");
    is_demand[p.index()] = true;
  }
  auto manhattan = [](const LatticePoint& a, const LatticePoint& b) {
    return std::abs(a.row - b.row) + std::abs(a.col - b.col);
  };
  auto at = [](int index) { return LatticePoint{index / 5 + 1, index % 5 + 1}; };

  std::vector<bool> keep = is_demand;
  for (int w = 0; w < 25; ++w) {
    if (keep[w]) continue;
    const LatticePoint pw = at(w);
    for (int a = 0; a < d && !keep[w]; ++a) {
      for (int b = a + 1; b < d; ++b) {
        const auto& pa = demand_points[a];
        const auto& pb = demand_points[b];
        if (manhattan(pa, pw) + manhattan(pw, pb) == manhattan(pa, pb)) {
          keep[w] = true;
          break;
        }
      }
    }
  }

  std::vector<int> order;
  for (int idx = 0; idx < 25; ++idx)
    if (is_demand[idx]) order.push_back(idx);
  for (int idx = 0; idx < 25; ++idx)
    if (keep[idx] && !is_demand[idx]) order.push_back(idx);
  std::vector<NodeId> relabel(25, -1);
  for (std::size_t k = 0; k < order.size(); ++k) relabel[order[k]] = static_cast<NodeId>(k);

  LatticeLayout layout;
  layout.topology.demand_count = d;
  layout.topology.node_count = static_cast<int>(order.size());
  for (int idx : order) layout.coords.push_back(at(idx));
  for (int idx = 0; idx < 25; ++idx) {
    if (!keep[idx]) continue;
    const int right = idx + 1;
    const int down = idx + 5;
    if (idx % 5 != 4 && keep[right]) layout.topology.edges.emplace_back(relabel[idx], relabel[right]);
    if (down < 25 && keep[down]) layout.topology.edges.emplace_back(relabel[idx], relabel[down]);
  }
  return layout;
}

LatticeLayout build_random_lattice(RandomStream& rng, int d) {
  require(d >= 2 && d <= 25, "lattice layout needs between 2 and 25 demand points");
  std::vector<int> cells(25);
  std::iota(cells.begin(), cells.end(), 0);
  for (int k = 0; k < d; ++k) {
    const int pick = rng.uniform_int(k, 24);
    std::swap(cells[k], cells[pick]);
  }
  std::vector<LatticePoint> points;
  for (int k = 0; k < d; ++k) points.push_back({cells[k] / 5 + 1, cells[k] % 5 + 1});
  return build_lattice(points);
}

Topology build_complete(int d) {
  require(d >= 1, "complete layout needs d >= 1");
  Topology topo;
  topo.node_count = d;
  topo.demand_count = d;
  for (NodeId a = 0; a < d; ++a)
    for (NodeId b = a + 1; b < d; ++b) topo.edges.emplace_back(a, b);
  return topo;
}

Network::Network(Topology topology, std::vector<DemandRates> rates, double tau)
    : node_count_(topology.node_count),
      edges_(std::move(topology.edges)),
      clusters_(std::move(topology.clusters)),
      rates_(std::move(rates)),
      tau_(tau) {
  const int d = static_cast<int>(rates_.size());
  require(d >= 1, "network needs at least one demand point");
  require(topology.demand_count == d, "rate vector length must equal the demand count");
  require(d <= node_count_, "more demand points than nodes");
  require(tau_ > 0.0, "switching rate must be positive");
  for (int i = 0; i < d; ++i) {
    const auto& r = rates_[i];
    const std::string who = "demand point " + std::to_string(i + 1);
    require(r.lambda >= 0.0, who + ": arrival rate must be nonnegative");
    require(r.mu > 0.0, who + ": processing rate must be positive");
    require(r.cost >= 0.0, who + ": holding cost must be nonnegative");
    if (!(r.lambda < r.mu)) fail(ErrorCode::Model, who + ": arrival rate must be below processing rate");
  }
  adjacency_ = adjacency_lists(node_count_, edges_);
  dist_ = all_pairs_distance(node_count_, edges_);
  for (const auto& cluster : clusters_) {
    for (NodeId v : cluster) require(is_demand(v), "cluster member is not a demand point");
  }

  for (const auto& r : rates_) {
    rho_ += r.lambda / r.mu;
    total_lambda_ += r.lambda;
  }
  if (rate_budget() > 1.0 + kBudgetSlack) {
    fail(ErrorCode::Model, "rates exceed the unit uniformization budget (sum lambda + max(mu, tau) = " +
                               std::to_string(rate_budget()) + ")");
  }

  next_hop_.assign(static_cast<std::size_t>(node_count_) * node_count_, -1);
  for (NodeId from = 0; from < node_count_; ++from) {
    for (NodeId to = 0; to < node_count_; ++to) {
      if (from == to) continue;
      // Neighbour lists are sorted, so the first match is the lowest id.
      for (NodeId u : adjacency_[from]) {
        if (dist_(u, to) == dist_(from, to) - 1) {
          next_hop_[static_cast<std::size_t>(from) * node_count_ + to] = u;
          break;
        }
      }
    }
  }
}

NodeId Network::next_step(NodeId from, NodeId to) const {
  require(from >= 0 && from < node_count_ && to >= 0 && to < node_count_, "node out of range");
  require(from != to, "next_step needs distinct endpoints");
  return next_hop_[static_cast<std::size_t>(from) * node_count_ + to];
}

double Network::rate_budget() const {
  double peak = tau_;
  for (const auto& r : rates_) peak = std::max(peak, r.mu);
  return total_lambda_ + peak;
}

int Network::max_stage_distance() const {
  int best = 0;
  for (NodeId s = demand_count(); s < node_count_; ++s)
    for (NodeId j = 0; j < demand_count(); ++j) best = std::max(best, dist_(s, j));
  return best;
}

bool Network::is_complete() const {
  for (NodeId v = 0; v < node_count_; ++v)
    if (static_cast<int>(adjacency_[v].size()) != node_count_ - 1) return false;
  return true;
}

}  // namespace jobsched
