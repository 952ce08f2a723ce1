#include "jobsched/dp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

std::size_t encode(const SystemState& s, int m, std::size_t block) {
  std::size_t idx = 0;
  for (std::size_t i = s.jobs.size(); i-- > 0;) idx = idx * (m + 1) + static_cast<std::size_t>(s.jobs[i]);
  return static_cast<std::size_t>(s.server) * block + idx;
}

}  // namespace

std::uint64_t truncated_state_count(const Network& net, int m) {
  require(m >= 1, "truncation level must be at least 1");
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = static_cast<std::uint64_t>(net.node_count());
  for (int i = 0; i < net.demand_count(); ++i) {
    if (count > cap / static_cast<std::uint64_t>(m + 1)) return cap;
    count *= static_cast<std::uint64_t>(m + 1);
  }
  return count;
}

TruncatedMdp::TruncatedMdp(const Network& net, int m, std::uint64_t max_states)
    : m_(m), d_(net.demand_count()) {
  const std::uint64_t total = truncated_state_count(net, m);
  if (total > max_states || total > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::InvalidArgument,
         "truncated state space too large: " + std::to_string(total) + " states");
  }
  state_count_ = static_cast<std::size_t>(total);
  block_ = state_count_ / static_cast<std::size_t>(net.node_count());

  std::vector<std::size_t> stride(d_);
  for (int i = 0; i < d_; ++i) stride[i] = i == 0 ? 1 : stride[i - 1] * (m + 1);

  cost_.resize(state_count_);
  state_action_.reserve(state_count_ + 1);
  std::vector<int> jobs(d_, 0);
  for (std::size_t s = 0; s < state_count_; ++s) {
    const NodeId v = static_cast<NodeId>(s / block_);
    std::size_t rest = s % block_;
    double f = 0.0;
    for (int i = 0; i < d_; ++i) {
      jobs[i] = static_cast<int>(rest % (m + 1));
      rest /= (m + 1);
      f += net.cost(i) * jobs[i];
    }
    cost_[s] = f;
    state_action_.push_back(action_node_.size());

    // Action list: current node and neighbours, ascending.
    std::vector<NodeId> actions = net.neighbors(v);
    actions.insert(std::upper_bound(actions.begin(), actions.end(), v), v);
    for (NodeId a : actions) {
      action_node_.push_back(a);
      action_entry_.push_back(next_.size());
      double moved = 0.0;
      double saturated = 0.0;
      for (int i = 0; i < d_; ++i) {
        const double lam = net.lambda(i);
        if (lam <= 0.0) continue;
        if (jobs[i] < m) {
          next_.push_back(static_cast<std::uint32_t>(s + stride[i]));
          prob_.push_back(lam);
          moved += lam;
        } else {
          saturated += lam;
        }
      }
      if (a == v) {
        if (net.is_demand(v) && jobs[v] >= 1) {
          next_.push_back(static_cast<std::uint32_t>(s - stride[v]));
          prob_.push_back(net.mu(v));
          moved += net.mu(v);
        }
      } else {
        next_.push_back(static_cast<std::uint32_t>(s + (static_cast<std::size_t>(a) - v) * block_));
        prob_.push_back(net.tau());
        moved += net.tau();
      }
      if (moved + saturated > 1.0 + 1e-12) {
        fail(ErrorCode::Model, "transition rates exceed the unit step budget");
      }
      const double self = 1.0 - moved;
      if (self > 0.0) {
        next_.push_back(static_cast<std::uint32_t>(s));
        prob_.push_back(self);
      }
    }
  }
  state_action_.push_back(action_node_.size());
  action_entry_.push_back(next_.size());
}

std::size_t TruncatedMdp::index_of(const SystemState& s) const {
  require(static_cast<int>(s.jobs.size()) == d_, "job vector length mismatch");
  for (int x : s.jobs) require(x >= 0 && x <= m_, "job count outside the truncation");
  require(static_cast<std::size_t>(s.server) < state_count_ / block_, "server node out of range");
  return encode(s, m_, block_);
}

SystemState TruncatedMdp::state_at(std::size_t index) const {
  require(index < state_count_, "state index out of range");
  SystemState s;
  s.server = static_cast<NodeId>(index / block_);
  std::size_t rest = index % block_;
  s.jobs.resize(d_);
  for (int i = 0; i < d_; ++i) {
    s.jobs[i] = static_cast<int>(rest % (m_ + 1));
    rest /= (m_ + 1);
  }
  return s;
}

TruncatedMdp build_truncated(const Network& net, int m) { return TruncatedMdp(net, m); }

DpResult relative_value_iteration(const TruncatedMdp& mdp, double tolerance, long max_iters) {
  require(tolerance > 0.0, "tolerance must be positive");
  require(max_iters >= 1, "iteration cap must be positive");
  const std::size_t n = mdp.state_count();
  std::vector<double> value(n, 0.0), next(n, 0.0);
  std::vector<NodeId> greedy(n, 0);
  const std::size_t reference = 0;

  DpResult out;
  out.truncation = mdp.truncation();
  double lo = 0.0, hi = 0.0;
  for (long iter = 1; iter <= max_iters; ++iter) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t s = 0; s < n; ++s) {
      double best = std::numeric_limits<double>::infinity();
      NodeId best_action = 0;
      for (std::size_t a = mdp.action_begin(s); a < mdp.action_begin(s + 1); ++a) {
        double q = 0.0;
        for (std::size_t e = mdp.entry_begin(a); e < mdp.entry_begin(a + 1); ++e)
          q += mdp.entry_prob(e) * value[mdp.entry_next(e)];
        if (q < best) {
          best = q;
          best_action = mdp.action_node(a);
        }
      }
      next[s] = mdp.cost(s) + best;
      greedy[s] = best_action;
      const double diff = next[s] - value[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    const double shift = next[reference];
    for (std::size_t s = 0; s < n; ++s) value[s] = next[s] - shift;
    out.iterations = iter;
    out.span = hi - lo;
    if (out.span < tolerance) {
      out.converged = true;
      break;
    }
  }
  out.g_star = 0.5 * (lo + hi);
  out.greedy = std::move(greedy);
  return out;
}

FeasibilityResult feasibility_escalation(const Network& net, const FeasibilityLimits& limits) {
  FeasibilityResult out;
  if (net.demand_count() > limits.max_demand) {
    out.reason = "too many demand points";
    return out;
  }
  for (int m = limits.start_m;; m += limits.step_m) {
    if (truncated_state_count(net, m) >= limits.state_limit) break;
    const auto t0 = std::chrono::steady_clock::now();
    DpResult solved = relative_value_iteration(TruncatedMdp(net, m), limits.tolerance, limits.max_iters);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.history.push_back({m, solved.g_star, seconds, solved.iterations, solved.converged});
    out.last = std::move(solved);
    if (!out.last.converged) {
      out.reason = "value iteration did not converge";
      return out;
    }
    if (seconds >= limits.time_limit_seconds) break;
  }
  if (out.history.empty()) {
    out.reason = "smallest truncation exceeds the state limit";
    return out;
  }
  out.g_star = out.history.back().g_star;
  if (out.history.size() < 2) {
    out.reason = "only one truncation solved; increment unknown";
    return out;
  }
  if (out.g_star <= 0.0) {
    out.reason = "zero optimal cost";
    return out;
  }
  const double increment = out.g_star - out.history[out.history.size() - 2].g_star;
  if (increment > limits.epsilon) {
    out.reason = "truncation still binding";
    return out;
  }
  out.feasible = true;
  out.reason = "converged";
  return out;
}

DpGreedyPolicy::DpGreedyPolicy(const Network& net, const DpResult& result)
    : m_(result.truncation), greedy_(result.greedy) {
  require(m_ >= 1, "greedy policy needs a solved truncation");
  require(greedy_.size() == truncated_state_count(net, m_), "greedy table does not match network");
}

NodeId DpGreedyPolicy::decide(const SystemState& state) {
  SystemState capped = state;
  for (int& x : capped.jobs) x = std::min(x, m_);
  std::size_t block = 1;
  for (std::size_t i = 0; i < capped.jobs.size(); ++i) block *= static_cast<std::size_t>(m_ + 1);
  return greedy_[encode(capped, m_, block)];
}

}  // namespace jobsched
