#pragma once

#include <functional>
#include <vector>

#include "jobsched/network.hpp"

namespace jobsched {

/// Server location plus job counts; the MDP state.
struct SystemState {
  NodeId server = 0;
  std::vector<int> jobs;

  bool operator==(const SystemState&) const = default;
};

// (0, (0, ..., 0)): server at the first demand point, every queue empty.
SystemState initial_state(const Network& net);

struct TransitionEntry {
  SystemState next;
  double prob = 0.0;
};

// Current node followed by its neighbours, ascending.
std::vector<NodeId> action_set(const Network& net, const SystemState& state);

bool is_valid_action(const Network& net, const SystemState& state, NodeId action);

/// Successor distribution under the unit-step kernel: one entry per arrival
/// band, then the service or move entry when applicable, and the
/// self-transition last. Zero-probability entries are omitted.
std::vector<TransitionEntry> transition_distribution(const Network& net, const SystemState& state,
                                                     NodeId action);

// Holding cost rate sum_i c_i x_i.
double step_cost(const Network& net, const SystemState& state);

// c_i mu_i when serving a non-empty demand point i in place, else 0.
double reward_rate(const Network& net, const SystemState& state, NodeId action);

struct StateHash {
  std::size_t operator()(const SystemState& s) const noexcept {
    std::size_t h = std::hash<int>{}(s.server);
    for (int x : s.jobs) h = h * 1000003u ^ std::hash<int>{}(x);
    return h;
  }
};

}  // namespace jobsched
