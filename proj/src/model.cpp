#include "jobsched/model.hpp"

#include <algorithm>
#include <string>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

constexpr double kBudgetSlack = 1e-12;

void check_state(const Network& net, const SystemState& state) {
  require(state.server >= 0 && state.server < net.node_count(), "server node out of range");
  require(static_cast<int>(state.jobs.size()) == net.demand_count(),
          "job vector length must equal the demand count");
  for (int x : state.jobs) require(x >= 0, "job counts must be nonnegative");
}

}  // namespace

SystemState initial_state(const Network& net) {
  return SystemState{0, std::vector<int>(net.demand_count(), 0)};
}

std::vector<NodeId> action_set(const Network& net, const SystemState& state) {
  check_state(net, state);
  std::vector<NodeId> actions = net.neighbors(state.server);
  actions.insert(std::upper_bound(actions.begin(), actions.end(), state.server), state.server);
  return actions;
}

bool is_valid_action(const Network& net, const SystemState& state, NodeId action) {
  if (action == state.server) return true;
  const auto& nb = net.neighbors(state.server);
  return std::binary_search(nb.begin(), nb.end(), action);
}

std::vector<TransitionEntry> transition_distribution(const Network& net, const SystemState& state,
                                                     NodeId action) {
  check_state(net, state);
  if (!is_valid_action(net, state, action)) {
    fail(ErrorCode::InvalidArgument, "action " + std::to_string(action + 1) +
                                         " is not available at node " +
                                         std::to_string(state.server + 1));
  }
  std::vector<TransitionEntry> out;
  double total = 0.0;
  for (int i = 0; i < net.demand_count(); ++i) {
    if (net.lambda(i) <= 0.0) continue;
    SystemState next = state;
    ++next.jobs[i];
    out.push_back({std::move(next), net.lambda(i)});
    total += net.lambda(i);
  }
  const NodeId v = state.server;
  if (action == v) {
    if (net.is_demand(v) && state.jobs[v] >= 1) {
      SystemState next = state;
      --next.jobs[v];
      out.push_back({std::move(next), net.mu(v)});
      total += net.mu(v);
    }
  } else {
    SystemState next = state;
    next.server = action;
    out.push_back({std::move(next), net.tau()});
    total += net.tau();
  }
  if (total > 1.0 + kBudgetSlack) {
    fail(ErrorCode::Model, "transition rates exceed the unit step budget");
  }
  const double self = 1.0 - total;
  if (self > 0.0) out.push_back({state, self});
  return out;
}

double step_cost(const Network& net, const SystemState& state) {
  double f = 0.0;
  for (int i = 0; i < net.demand_count(); ++i) f += net.cost(i) * state.jobs[i];
  return f;
}

double reward_rate(const Network& net, const SystemState& state, NodeId action) {
  const NodeId v = state.server;
  if (action == v && net.is_demand(v) && state.jobs[v] >= 1) return net.cost(v) * net.mu(v);
  return 0.0;
}

}  // namespace jobsched
