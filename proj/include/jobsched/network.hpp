#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "jobsched/random.hpp"

namespace jobsched {

// Nodes are indexed from 0. Demand points occupy 0..d-1 and intermediate
// stages d..d+n-1, so node k here is node k+1 in the usual 1-based labelling.
using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

/// Dense all-pairs hop-count matrix.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(int node_count, std::vector<int> hops)
      : node_count_(node_count), hops_(std::move(hops)) {}

  int operator()(NodeId a, NodeId b) const {
    return hops_[static_cast<std::size_t>(a) * node_count_ + b];
  }
  int node_count() const { return node_count_; }

 private:
  int node_count_ = 0;
  std::vector<int> hops_;
};

/// Breadth-first search from every node. Throws on a disconnected graph,
/// a self-loop, or an edge endpoint out of range.
DistanceMatrix all_pairs_distance(int node_count, const std::vector<Edge>& edges);

/// Graph layout without rates: node count, demand count, edges, and the
/// optional cluster grouping of demand points.
struct Topology {
  int node_count = 0;
  int demand_count = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<NodeId>> clusters;
};

// Two clusters of d1 and d2 demand points joined by a chain of n stages.
// Left points are 0..d1-1, right points d1..d1+d2-1, and the chain runs
// left to right from d to d+n-1.
Topology build_two_cluster(int d1, int d2, int n);

struct LatticePoint {
  int row = 1;  // 1..5
  int col = 1;  // 1..5
  int index() const { return (row - 1) * 5 + (col - 1); }
  bool operator==(const LatticePoint&) const = default;
};

struct LatticeLayout {
  Topology topology;
  std::vector<LatticePoint> coords;  // per node of the pruned graph
};

// 5x5 grid with the given demand points. Stages that lie on no shortest path
// between two demand points are dropped; demand points are renumbered first
// in lattice-index order, surviving stages follow in lattice-index order.
LatticeLayout build_lattice(const std::vector<LatticePoint>& demand_points);

// Draws d distinct lattice nodes uniformly and builds the pruned layout.
LatticeLayout build_random_lattice(RandomStream& rng, int d);

// Topology with every pair of demand points adjacent and no stages.
Topology build_complete(int d);

struct DemandRates {
  double lambda = 0.0;
  double mu = 0.0;
  double cost = 0.0;
};

/// Immutable network with rates, in the uniformized (unit step) scale.
///
/// Construction validates: connectivity, no self-loops, lambda >= 0,
/// mu > lambda, cost >= 0, tau > 0, and the unit rate budget
/// sum(lambda) + max(mu..., tau) <= 1.
class Network {
 public:
  Network(Topology topology, std::vector<DemandRates> rates, double tau);

  int node_count() const { return node_count_; }
  int demand_count() const { return static_cast<int>(rates_.size()); }
  int stage_count() const { return node_count_ - demand_count(); }
  bool is_demand(NodeId v) const { return v >= 0 && v < demand_count(); }

  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::vector<NodeId>>& clusters() const { return clusters_; }
  const DistanceMatrix& distances() const { return dist_; }
  int distance(NodeId a, NodeId b) const { return dist_(a, b); }

  // First node on the lowest-numbered shortest path; throws if from == to.
  NodeId next_step(NodeId from, NodeId to) const;

  double lambda(int i) const { return rates_[i].lambda; }
  double mu(int i) const { return rates_[i].mu; }
  double cost(int i) const { return rates_[i].cost; }
  const std::vector<DemandRates>& rates() const { return rates_; }
  double tau() const { return tau_; }

  double rho() const { return rho_; }
  double total_arrival_rate() const { return total_lambda_; }
  double eta() const { return total_lambda_ > 0.0 ? tau_ / total_lambda_ : 0.0; }
  // sum(lambda) + max(mu..., tau); the uniformization budget.
  double rate_budget() const;
  // Largest stage-to-demand distance; 0 when there are no stages.
  int max_stage_distance() const;
  bool is_complete() const;

 private:
  int node_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::vector<NodeId>> clusters_;
  std::vector<DemandRates> rates_;
  double tau_;
  double rho_ = 0.0;
  double total_lambda_ = 0.0;
  DistanceMatrix dist_;
  std::vector<NodeId> next_hop_;
};

}  // namespace jobsched
