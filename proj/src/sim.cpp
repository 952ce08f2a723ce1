#include "jobsched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jobsched/error.hpp"
#include "jobsched/random.hpp"

namespace jobsched {

namespace {

// Mean and standard error from equally weighted batch means.
void finish_batches(SimReport& report, const std::vector<double>& batch_sums,
                    const std::vector<double>& batch_lengths) {
  std::vector<double> means;
  for (std::size_t b = 0; b < batch_sums.size(); ++b)
    if (batch_lengths[b] > 0.0) means.push_back(batch_sums[b] / batch_lengths[b]);
  report.batches = static_cast<int>(means.size());
  if (means.size() < 2) return;
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double k = static_cast<double>(means.size());
  report.std_error = std::sqrt(ss / (k - 1.0) / k);
  report.half_width = 1.96 * report.std_error;
}

}  // namespace

SimReport simulate_discrete(const Network& net, Policy& policy, std::uint64_t seed,
                            const DiscreteOptions& options) {
  require(options.horizon > 0, "horizon must be positive");
  require(options.batches >= 1, "batch count must be positive");
  const int d = net.demand_count();
  std::vector<double> band(d);
  double cumulative = 0.0;
  for (int i = 0; i < d; ++i) {
    cumulative += net.lambda(i);
    band[i] = cumulative;
  }
  const double arrival_total = cumulative;

  RandomStream rng(seed);
  policy.reset();
  SystemState state = initial_state(net);
  SimReport report;
  report.policy = policy.name();
  report.seed = seed;
  report.warmup = static_cast<double>(options.warmup);
  report.horizon = static_cast<double>(options.horizon);
  report.mean_queue.assign(d, 0.0);

  const std::uint64_t batches = std::min<std::uint64_t>(options.batches, options.horizon);
  std::vector<double> batch_sum(batches, 0.0), batch_len(batches, 0.0);
  std::vector<std::uint64_t> queue_sum(d, 0);
  double total = 0.0;
  double window_sum = 0.0;
  std::uint64_t window_fill = 0;
  const std::uint64_t end = options.warmup + options.horizon;

  for (std::uint64_t step = 0; step < end; ++step) {
    const NodeId v = state.server;
    const NodeId action = policy.decide(state);
    if (!is_valid_action(net, state, action)) {
      fail(ErrorCode::Model, "policy " + report.policy + " chose an unavailable action");
    }
    if (step >= options.warmup) {
      const std::uint64_t k = step - options.warmup;
      const double f = step_cost(net, state);
      total += f;
      const std::uint64_t b = k * batches / options.horizon;
      batch_sum[b] += f;
      batch_len[b] += 1.0;
      for (int i = 0; i < d; ++i) queue_sum[i] += static_cast<std::uint64_t>(state.jobs[i]);
      if (options.window > 0) {
        window_sum += f;
        if (++window_fill == options.window) {
          report.window_means.push_back(window_sum / static_cast<double>(options.window));
          window_sum = 0.0;
          window_fill = 0;
        }
      }
    }

    double event_rate = 0.0;
    if (action != v) {
      event_rate = net.tau();
    } else if (net.is_demand(v) && state.jobs[v] > 0) {
      event_rate = net.mu(v);
    }
    if (arrival_total + event_rate > 1.0 + 1e-12) {
      fail(ErrorCode::Model, "step probabilities exceed one");
    }

    const double u = rng.uniform();
    int arrival = -1;
    if (u < arrival_total) {
      arrival = static_cast<int>(std::upper_bound(band.begin(), band.end(), u) - band.begin());
      if (arrival >= d) arrival = d - 1;
    }
    if (options.observer) options.observer(step, state, action, arrival);

    if (arrival >= 0) {
      ++state.jobs[arrival];
      if (step >= options.warmup) ++report.arrivals;
    } else if (u < arrival_total + event_rate) {
      if (action != v) {
        state.server = action;
        if (step >= options.warmup) ++report.switches;
      } else {
        --state.jobs[v];
        if (step >= options.warmup) ++report.services;
      }
    }
  }

  const double n = static_cast<double>(options.horizon);
  report.average_cost = total / n;
  for (int i = 0; i < d; ++i) report.mean_queue[i] = static_cast<double>(queue_sum[i]) / n;
  finish_batches(report, batch_sum, batch_len);
  return report;
}

SimReport simulate_discrete(const Network& net, Policy& policy, std::uint64_t seed,
                            std::uint64_t warmup, std::uint64_t horizon) {
  DiscreteOptions options;
  options.warmup = warmup;
  options.horizon = horizon;
  return simulate_discrete(net, policy, seed, options);
}

SimReport simulate_dvo(const Network& net, std::uint64_t seed, const DvoOptions& options) {
  require(options.horizon > 0.0, "horizon must be positive");
  require(options.warmup >= 0.0, "warm-up must be nonnegative");
  require(options.batches >= 1, "batch count must be positive");
  const int d = net.demand_count();
  constexpr double kNever = std::numeric_limits<double>::infinity();

  RandomStream rng(seed);
  SimReport report;
  report.policy = "dvo";
  report.seed = seed;
  report.warmup = options.warmup;
  report.horizon = options.horizon;
  report.mean_queue.assign(d, 0.0);

  SystemState state = initial_state(net);
  std::vector<double> next_arrival(d, kNever);
  for (int i = 0; i < d; ++i)
    if (net.lambda(i) > 0.0) next_arrival[i] = rng.exponential(net.lambda(i));

  DvoCommitment commit;
  double activity_end = kNever;
  auto apply = [&](const DvoOutcome& outcome, double now) {
    commit = outcome.commitment;
    switch (commit.mode) {
      case DvoMode::Processing:
        activity_end = now + rng.exponential(net.mu(state.server));
        break;
      case DvoMode::Switching:
        activity_end = now + rng.exponential(net.tau());
        break;
      case DvoMode::Idle:
        activity_end = kNever;
        break;
    }
  };
  apply(dvo_decide(net, state, EpochKind::ArrivedAtPoint, commit), 0.0);

  const double start = options.warmup;
  const double stop = options.warmup + options.horizon;
  const int batches = options.batches;
  const double batch_span = options.horizon / batches;
  std::vector<double> batch_sum(batches, 0.0), batch_len(batches, 0.0);
  double integral = 0.0;
  double cost_rate = 0.0;
  double now = 0.0;

  // Adds cost_rate and queue lengths over [a, b) clipped to the measured window.
  auto accrue = [&](double a, double b) {
    a = std::max(a, start);
    b = std::min(b, stop);
    if (b <= a) return;
    integral += cost_rate * (b - a);
    for (int i = 0; i < d; ++i) report.mean_queue[i] += state.jobs[i] * (b - a);
    while (a < b) {
      const int k = std::min(batches - 1, static_cast<int>((a - start) / batch_span));
      double edge = k == batches - 1 ? b : std::min(b, start + (k + 1) * batch_span);
      if (edge <= a) edge = b;  // rounding at a batch boundary
      batch_sum[k] += cost_rate * (edge - a);
      batch_len[k] += edge - a;
      a = edge;
    }
  };

  while (now < stop) {
    int who = -1;
    double t_next = activity_end;
    for (int i = 0; i < d; ++i) {
      if (next_arrival[i] < t_next) {
        t_next = next_arrival[i];
        who = i;
      }
    }
    if (t_next == kNever) {
      accrue(now, stop);
      break;
    }
    accrue(now, t_next);
    now = t_next;
    if (now >= stop) break;
    const bool counting = now >= start;

    if (who >= 0) {
      ++state.jobs[who];
      cost_rate = step_cost(net, state);
      if (counting) ++report.arrivals;
      next_arrival[who] = now + rng.exponential(net.lambda(who));
      if (commit.mode == DvoMode::Idle) {
        apply(dvo_decide(net, state, EpochKind::IdleArrival, commit), now);
      }
      continue;
    }

    if (commit.mode == DvoMode::Processing) {
      const NodeId i = state.server;
      --state.jobs[i];
      cost_rate = step_cost(net, state);
      if (counting) ++report.services;
      apply(dvo_decide(net, state, EpochKind::JobFinished, commit), now);
    } else {
      // One edge of the current switch is done.
      state.server = commit.path.front();
      commit.path.erase(commit.path.begin());
      if (counting) ++report.switches;
      if (commit.path.empty()) {
        apply(dvo_decide(net, state, EpochKind::ArrivedAtPoint, commit), now);
      } else {
        activity_end = now + rng.exponential(net.tau());
      }
    }
  }

  report.average_cost = integral / options.horizon;
  for (double& q : report.mean_queue) q /= options.horizon;
  finish_batches(report, batch_sum, batch_len);
  return report;
}

SimReport simulate_dvo(const Network& net, std::uint64_t seed, double warmup, double horizon) {
  DvoOptions options;
  options.warmup = warmup;
  options.horizon = horizon;
  return simulate_dvo(net, seed, options);
}

double switch_time_bound(const Network& net) {
  const int M = net.max_stage_distance();
  require(M >= 1, "network has no intermediate stages");
  const double tau = net.tau();
  const double lam = net.total_arrival_rate();
  return (M / tau) * std::pow((lam + tau) / tau, 2.0 * (M - 1));
}

SwitchTimeEstimate estimate_switch_time_bound(const Network& net, Policy& policy,
                                              std::uint64_t seed, std::uint64_t trials) {
  require(net.stage_count() > 0, "network has no intermediate stages");
  require(trials >= 2, "need at least two episodes");
  const int d = net.demand_count();
  std::vector<double> band(d);
  double cumulative = 0.0;
  for (int i = 0; i < d; ++i) band[i] = (cumulative += net.lambda(i));

  SwitchTimeEstimate out;
  out.max_distance = net.max_stage_distance();
  out.bound = switch_time_bound(net);
  out.trials = trials;
  RandomStream rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t k = 0; k < trials; ++k) {
    policy.reset();
    SystemState state{d + rng.uniform_int(0, net.stage_count() - 1), std::vector<int>(d, 0)};
    std::uint64_t steps = 0;
    while (!net.is_demand(state.server)) {
      const NodeId action = policy.decide(state);
      const double u = rng.uniform();
      ++steps;
      if (u < cumulative) {
        const auto i = std::upper_bound(band.begin(), band.end(), u) - band.begin();
        ++state.jobs[std::min<std::ptrdiff_t>(i, d - 1)];
      } else if (action != state.server && u < cumulative + net.tau()) {
        state.server = action;
      }
    }
    sum += static_cast<double>(steps);
    sum_sq += static_cast<double>(steps) * static_cast<double>(steps);
  }
  const double n = static_cast<double>(trials);
  out.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace jobsched
