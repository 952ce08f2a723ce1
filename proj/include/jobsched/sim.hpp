#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jobsched/heuristics.hpp"
#include "jobsched/model.hpp"
#include "jobsched/network.hpp"

namespace jobsched {

/// Outcome of one simulation run. Horizons are steps for the step simulator
/// and time units for the DVO simulator.
struct SimReport {
  std::string policy;
  std::uint64_t seed = 0;
  double warmup = 0.0;
  double horizon = 0.0;
  double average_cost = 0.0;
  double std_error = 0.0;   // batch-means estimate
  double half_width = 0.0;  // 1.96 * std_error
  int batches = 0;
  std::vector<double> mean_queue;  // per demand point, over the horizon
  std::uint64_t arrivals = 0;
  std::uint64_t services = 0;
  std::uint64_t switches = 0;  // completed edge traversals
  std::vector<double> window_means;
};

/// Per-step hook for diagnostics. `arrival_point` is -1 when the step had
/// no arrival. Steps are numbered from 0 including the warm-up.
using StepObserver =
    std::function<void(std::uint64_t step, const SystemState& state, NodeId action, int arrival_point)>;

struct DiscreteOptions {
  std::uint64_t warmup = 10'000;
  std::uint64_t horizon = 1'000'000;
  int batches = 40;
  std::uint64_t window = 0;  // nonzero: also report means of consecutive windows
  StepObserver observer;
};

/// Step simulator with common random numbers. One uniform per step: arrival
/// bands first (lambda_0, lambda_1, ...), then the band for the chosen
/// action's service or move, and the remainder is the self-transition.
SimReport simulate_discrete(const Network& net, Policy& policy, std::uint64_t seed,
                            const DiscreteOptions& options);

SimReport simulate_discrete(const Network& net, Policy& policy, std::uint64_t seed,
                            std::uint64_t warmup, std::uint64_t horizon);

struct DvoOptions {
  double warmup = 10'000.0;
  double horizon = 1'000'000.0;
  int batches = 40;
};

/// Event-driven simulation of the DVO heuristic in continuous time.
/// Services are uninterruptible, and a switch is a chain of exponential legs.
SimReport simulate_dvo(const Network& net, std::uint64_t seed, const DvoOptions& options);

SimReport simulate_dvo(const Network& net, std::uint64_t seed, double warmup, double horizon);

struct SwitchTimeEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // (M/tau) ((Lambda + tau)/tau)^(2(M-1))
  int max_distance = 0;
  std::uint64_t trials = 0;
};

// Closed-form bound on the expected time for a server at a stage to reach a
// demand point.
double switch_time_bound(const Network& net);

/// Runs `trials` episodes of the step simulator, each starting from a
/// uniformly drawn stage with empty queues, and measures the steps until the
/// server stands on a demand point. One step is one time unit.
SwitchTimeEstimate estimate_switch_time_bound(const Network& net, Policy& policy,
                                              std::uint64_t seed, std::uint64_t trials);

}  // namespace jobsched
