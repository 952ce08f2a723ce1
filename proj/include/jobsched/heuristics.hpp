#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "jobsched/fluid.hpp"
#include "jobsched/model.hpp"
#include "jobsched/network.hpp"

namespace jobsched {

/// Sizes of the candidate sets seen while making one decision.
struct EligibilityTrace {
  std::size_t candidates = 0;  // |S|, all sequences considered
  std::size_t sigma = 0;       // size of the set the choice was made from
  std::size_t sigma1 = 0;      // high-priority set (empty-node case only)
  std::size_t sigma2 = 0;      // low-priority set (empty-node case only)
};

struct PolicyDecision {
  NodeId action = 0;
  std::optional<DemandSequence> chosen_sequence;
  EligibilityTrace trace;
};

// Ties in index comparisons: values within this absolute distance are equal.
constexpr double kIndexTolerance = 1e-12;

/// K-stop decision over every demand point.
PolicyDecision kstop_decide(const Network& net, const SystemState& state, int K);

/// K-stop decision with sequence elements restricted to `pool` (ascending
/// ids). Used by the (K from L) variants.
PolicyDecision kstop_decide_over(const Network& net, const SystemState& state, int K,
                                 const std::vector<NodeId>& pool);

enum class SelectionMethod { Impartial, Stratified };

// Singleton index used to rank demand points before the restricted search.
// For j == server: c_v mu_v when that queue is nonempty, otherwise 0.
double singleton_index(const Network& net, const SystemState& state, NodeId j);

// The L demand points that the restricted search may use, ascending.
// Stratified selection draws per-cluster quotas from net.clusters().
std::vector<NodeId> select_candidate_pool(const Network& net, const SystemState& state, int L,
                                          SelectionMethod method);

PolicyDecision k_from_l_decide(const Network& net, const SystemState& state, int K, int L,
                               SelectionMethod method);

// ---- DVO -------------------------------------------------------------------

enum class EpochKind { JobFinished, ArrivedAtPoint, IdleArrival };
enum class DvoMode { Processing, Switching, Idle };

/// What the DVO server is committed to until its next decision epoch.
struct DvoCommitment {
  DvoMode mode = DvoMode::Idle;
  NodeId target = 0;          // destination while switching
  std::vector<NodeId> path;   // remaining nodes to traverse, target last
};

struct DvoOutcome {
  PolicyDecision decision;
  DvoCommitment commitment;
};

// Rule for one DVO decision epoch. Throws if the current commitment is a
// switch that has not reached its target yet.
DvoOutcome dvo_decide(const Network& net, const SystemState& state, EpochKind epoch,
                      const DvoCommitment& current);

// Node sequence from `from` to `to` along the tie-broken shortest path,
// excluding `from`.
std::vector<NodeId> shortest_path(const Network& net, NodeId from, NodeId to);

// ---- Reference policies ------------------------------------------------------

struct PollingOutcome {
  NodeId action;
  NodeId last_emptied;
};

// Exhaustive cyclic polling over demand points 0..d-1. `last_emptied` is
// refreshed first when the server sits at an empty demand point.
PollingOutcome polling_decide(const Network& net, const SystemState& state, NodeId last_emptied);

// Complete graphs only. Stays at a nonempty demand point; otherwise heads for
// the longest other queue, lowest id on ties.
NodeId serve_longest_queue_decide(const Network& net, const SystemState& state);

// ---- Policy objects for the step simulator ------------------------------------

class Policy {
 public:
  virtual ~Policy() = default;
  // Action for the current state. Policies with memory update it here.
  virtual NodeId decide(const SystemState& state) = 0;
  // Drops any memory so a fresh run starts from the same condition.
  virtual void reset() {}
  virtual std::string name() const = 0;
};

struct PolicySpec {
  enum class Kind { Dvo, KStop, KFromL, Polling, Slq };
  Kind kind = Kind::KStop;
  int k = 1;
  int l = 0;
  SelectionMethod method = SelectionMethod::Impartial;

  // Canonical string form; parse_policy(label()) round-trips.
  std::string label() const;
  bool stationary() const { return kind != Kind::Dvo; }
};

// "dvo", "kstop:K", "kfroml:K:L:impartial|stratified", "polling", "slq".
PolicySpec parse_policy(const std::string& text);

// Builds a step-simulator policy. Throws for DVO, which has its own simulator.
// A (K from L) pool larger than the demand count is clamped to it.
std::unique_ptr<Policy> make_policy(const Network& net, const PolicySpec& spec);

/// Memoizing wrapper: K-stop and (K from L) decisions depend on the state
/// only, and simulated chains revisit states constantly.
class CachedIndexPolicy : public Policy {
 public:
  CachedIndexPolicy(const Network& net, PolicySpec spec, std::size_t cache_limit = 400000);
  NodeId decide(const SystemState& state) override;
  std::string name() const override { return spec_.label(); }

 private:
  const Network& net_;
  PolicySpec spec_;
  std::size_t cache_limit_;
  std::unordered_map<SystemState, NodeId, StateHash> cache_;
};

class PollingPolicy : public Policy {
 public:
  explicit PollingPolicy(const Network& net) : net_(net) { reset(); }
  NodeId decide(const SystemState& state) override;
  void reset() override { last_emptied_ = net_.demand_count() - 1; }
  std::string name() const override { return "polling"; }

 private:
  const Network& net_;
  NodeId last_emptied_ = 0;
};

class LongestQueuePolicy : public Policy {
 public:
  explicit LongestQueuePolicy(const Network& net);
  NodeId decide(const SystemState& state) override { return serve_longest_queue_decide(net_, state); }
  std::string name() const override { return "slq"; }

 private:
  const Network& net_;
};

}  // namespace jobsched
