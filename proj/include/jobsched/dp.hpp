#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jobsched/heuristics.hpp"
#include "jobsched/model.hpp"
#include "jobsched/network.hpp"

namespace jobsched {

/// Finite MDP with every queue capped at m jobs, stored in compressed rows.
///
/// States use a mixed-radix index: server node, then x_0..x_{d-1} in base
/// m+1. An arrival to a full queue stays put, so its probability is added to
/// the self-transition.
class TruncatedMdp {
 public:
  TruncatedMdp(const Network& net, int m, std::uint64_t max_states = 50'000'000);

  int truncation() const { return m_; }
  std::size_t state_count() const { return state_count_; }
  std::size_t action_count() const { return action_node_.size(); }
  std::size_t entry_count() const { return next_.size(); }

  std::size_t index_of(const SystemState& s) const;
  SystemState state_at(std::size_t index) const;

  // Actions of state s occupy [action_begin(s), action_begin(s+1)).
  std::size_t action_begin(std::size_t s) const { return state_action_[s]; }
  NodeId action_node(std::size_t a) const { return action_node_[a]; }
  // Successors of action a occupy [entry_begin(a), entry_begin(a+1)).
  std::size_t entry_begin(std::size_t a) const { return action_entry_[a]; }
  std::uint32_t entry_next(std::size_t e) const { return next_[e]; }
  double entry_prob(std::size_t e) const { return prob_[e]; }
  double cost(std::size_t s) const { return cost_[s]; }

 private:
  int m_;
  int d_;
  std::size_t state_count_;
  std::size_t block_;  // (m+1)^d
  std::vector<double> cost_;
  std::vector<std::size_t> state_action_;
  std::vector<NodeId> action_node_;
  std::vector<std::size_t> action_entry_;
  std::vector<std::uint32_t> next_;
  std::vector<double> prob_;
};

// (d+n)(m+1)^d, saturating at UINT64_MAX.
std::uint64_t truncated_state_count(const Network& net, int m);

TruncatedMdp build_truncated(const Network& net, int m);

struct DpResult {
  double g_star = 0.0;
  long iterations = 0;
  double span = 0.0;
  bool converged = false;
  int truncation = 0;
  std::vector<NodeId> greedy;  // minimizing action per state index
};

// Relative value iteration with span-seminorm stopping. Reports
// non-convergence through `converged` rather than throwing.
DpResult relative_value_iteration(const TruncatedMdp& mdp, double tolerance = 1e-7,
                                  long max_iters = 1'000'000);

struct FeasibilityLimits {
  std::uint64_t state_limit = 1'000'000;
  double time_limit_seconds = 600.0;
  double epsilon = 1e-3;
  int start_m = 10;
  int step_m = 10;
  int max_demand = 3;  // more demand points than this is infeasible outright
  double tolerance = 1e-7;
  long max_iters = 1'000'000;
};

struct FeasibilityStep {
  int m = 0;
  double g_star = 0.0;
  double seconds = 0.0;
  long iterations = 0;
  bool converged = false;
};

struct FeasibilityResult {
  bool feasible = false;
  double g_star = 0.0;
  std::string reason;
  std::vector<FeasibilityStep> history;
  DpResult last;  // final solve, including its greedy policy
};

FeasibilityResult feasibility_escalation(const Network& net, const FeasibilityLimits& limits = {});

/// Greedy policy from a solved truncated MDP. Queues longer than the
/// truncation are looked up as if they were at the cap.
class DpGreedyPolicy : public Policy {
 public:
  DpGreedyPolicy(const Network& net, const DpResult& result);
  NodeId decide(const SystemState& state) override;
  std::string name() const override { return "dp"; }

 private:
  int m_;
  std::vector<NodeId> greedy_;
};

}  // namespace jobsched
