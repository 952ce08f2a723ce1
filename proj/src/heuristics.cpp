#include "jobsched/heuristics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

// Number of sequences of length 1..depth drawn without repetition from r items.
std::size_t subtree_size(std::size_t r, int depth) {
  std::size_t total = 0, term = 1;
  for (int k = 1; k <= depth && r >= static_cast<std::size_t>(k); ++k) {
    term *= r - (k - 1);
    total += term;
  }
  return total;
}

// Depth-first walk over candidate sequences in lexicographic order, a prefix
// always before its extensions, so a strict improvement test reproduces the
// lexicographic tie-break.
class SequenceSearch {
 public:
  SequenceSearch(const Network& net, const SystemState& state, int K,
                 const std::vector<NodeId>& pool)
      : net_(net), state_(state), K_(K), pool_(pool), used_(pool.size(), false) {
    const NodeId v = state.server;
    busy_case_ = net.is_demand(v) && state.jobs[v] > 0;
    rho_ = net.rho();
    if (net.is_demand(v)) origin_reward_ = net.cost(v) * net.mu(v);
  }

  PolicyDecision run() {
    const RouteTotals root = RouteTotals::start(state_.server, 0.0);
    for (std::size_t a = 0; a < pool_.size(); ++a) {
      if (pool_[a] == state_.server) continue;  // the first stop must differ from v
      used_[a] = true;
      prefix_.push_back(pool_[a]);
      const RouteTotals here = root.extend(net_, state_.jobs, pool_[a]);
      RouteTotals relocated = RouteTotals::start(pool_[a], 0.0).extend(net_, state_.jobs, pool_[a]);
      visit(here, relocated, false);
      prefix_.pop_back();
      used_[a] = false;
    }

    PolicyDecision out;
    out.action = state_.server;
    out.trace.candidates = candidates_;
    const Best* pick = nullptr;
    if (busy_case_) {
      out.trace.sigma = eligible_;
      if (best_case1_.found) pick = &best_case1_;
    } else {
      out.trace.sigma1 = sigma1_;
      out.trace.sigma2 = sigma2_;
      out.trace.sigma = sigma1_ > 0 ? sigma1_ : sigma2_;
      pick = sigma1_ > 0 ? &best_sigma1_ : (best_sigma2_.found ? &best_sigma2_ : nullptr);
    }
    if (pick != nullptr) {
      out.chosen_sequence = DemandSequence{pick->stops};
      out.action = net_.next_step(state_.server, pick->stops.front());
    }
    return out;
  }

 private:
  struct Best {
    bool found = false;
    double psi = 0.0;
    std::vector<NodeId> stops;

    void offer(double value, const std::vector<NodeId>& stops_now) {
      if (!found || value > psi + kIndexTolerance) {
        found = true;
        psi = value;
        stops = stops_now;
      }
    }
  };

  void visit(const RouteTotals& here, const RouteTotals& relocated, bool origin_seen) {
    ++candidates_;
    const NodeId v = state_.server;
    const NodeId last = prefix_.back();
    origin_seen = origin_seen || last == v;
    const int depth = static_cast<int>(prefix_.size());
    const double psi_x = here.psi();

    if (busy_case_) {
      const double back = static_cast<double>(net_.distance(last, v)) / net_.tau();
      const double phi = here.reward / (here.elapsed + back);
      const double beta =
          origin_seen ? 0.0 : here.busy_reward_rate() * rho_ + origin_reward_ * (1.0 - rho_);
      if (phi < beta - kIndexTolerance) {
        // Every extension shares this failing prefix condition.
        candidates_ += subtree_size(remaining(), K_ - depth);
        return;
      }
      if (here.psi_slope_sign() <= 0) {
        ++eligible_;
        best_case1_.offer(psi_x, prefix_);
      }
    } else if (here.psi_slope_sign() <= 0) {
      const double gamma_x = here.busy_reward_rate() * rho_;
      bool high = psi_x >= gamma_x - kIndexTolerance;
      if (high && depth >= 2) {
        high = relocated.psi() >= relocated.busy_reward_rate() * rho_ - kIndexTolerance;
      }
      if (high) {
        ++sigma1_;
        best_sigma1_.offer(psi_x, prefix_);
      } else {
        ++sigma2_;
        best_sigma2_.offer(psi_x, prefix_);
      }
    }

    if (depth >= K_) return;
    for (std::size_t a = 0; a < pool_.size(); ++a) {
      if (used_[a]) continue;
      used_[a] = true;
      prefix_.push_back(pool_[a]);
      visit(here.extend(net_, state_.jobs, pool_[a]), relocated.extend(net_, state_.jobs, pool_[a]),
            origin_seen);
      prefix_.pop_back();
      used_[a] = false;
    }
  }

  std::size_t remaining() const {
    return static_cast<std::size_t>(std::count(used_.begin(), used_.end(), false));
  }

  const Network& net_;
  const SystemState& state_;
  int K_;
  const std::vector<NodeId>& pool_;
  std::vector<bool> used_;
  std::vector<NodeId> prefix_;
  bool busy_case_ = false;
  double rho_ = 0.0;
  double origin_reward_ = 0.0;
  std::size_t candidates_ = 0, eligible_ = 0, sigma1_ = 0, sigma2_ = 0;
  Best best_case1_, best_sigma1_, best_sigma2_;
};

void check_stops_drain(const Network& net, const std::vector<NodeId>& pool) {
  for (NodeId j : pool) require(net.mu(j) > net.lambda(j), "processing rate must exceed arrival rate");
}

bool empty_node_case(const Network& net, const SystemState& state) {
  const NodeId v = state.server;
  return !(net.is_demand(v) && state.jobs[v] > 0);
}

// Demand points ordered by preference: for an empty server node, those whose
// singleton index reaches its gamma come first; then by index, then by id.
std::vector<NodeId> preference_order(const Network& net, const SystemState& state,
                                     const std::vector<NodeId>& members) {
  const NodeId v = state.server;
  const bool partition = empty_node_case(net, state);
  struct Ranked {
    NodeId id;
    bool high;
    double index;
  };
  std::vector<Ranked> ranked;
  for (NodeId j : members) {
    Ranked r{j, true, singleton_index(net, state, j)};
    if (partition) {
      if (j == v) {
        r.high = false;
      } else {
        const FluidEvaluation ev = evaluate_route(net, state, DemandSequence{{j}}, 0.0);
        r.high = ev.psi >= ev.gamma - kIndexTolerance;
      }
    }
    ranked.push_back(r);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.high != b.high) return a.high;
    if (std::abs(a.index - b.index) > kIndexTolerance) return a.index > b.index;
    return a.id < b.id;
  });
  std::vector<NodeId> out;
  for (const auto& r : ranked) out.push_back(r.id);
  return out;
}

}  // namespace

PolicyDecision kstop_decide_over(const Network& net, const SystemState& state, int K,
                                 const std::vector<NodeId>& pool) {
  require(K >= 1, "K must be at least 1");
  require(std::is_sorted(pool.begin(), pool.end()), "candidate pool must be ascending");
  for (NodeId j : pool) require(net.is_demand(j), "candidate pool holds a non-demand node");
  check_stops_drain(net, pool);
  return SequenceSearch(net, state, K, pool).run();
}

PolicyDecision kstop_decide(const Network& net, const SystemState& state, int K) {
  std::vector<NodeId> all(net.demand_count());
  std::iota(all.begin(), all.end(), 0);
  return kstop_decide_over(net, state, K, all);
}

double singleton_index(const Network& net, const SystemState& state, NodeId j) {
  if (j == state.server) return state.jobs[j] > 0 ? net.cost(j) * net.mu(j) : 0.0;
  return evaluate_route(net, state, DemandSequence{{j}}, 0.0).psi;
}

std::vector<NodeId> select_candidate_pool(const Network& net, const SystemState& state, int L,
                                          SelectionMethod method) {
  const int d = net.demand_count();
  require(L >= 1, "L must be at least 1");
  require(L <= d, "L cannot exceed the number of demand points");
  std::vector<NodeId> chosen;

  if (method == SelectionMethod::Impartial) {
    std::vector<NodeId> all(d);
    std::iota(all.begin(), all.end(), 0);
    auto order = preference_order(net, state, all);
    chosen.assign(order.begin(), order.begin() + L);
  } else {
    const auto& clusters = net.clusters();
    require(!clusters.empty(), "stratified selection needs cluster labels");
    const int C = static_cast<int>(clusters.size());
    std::vector<std::vector<NodeId>> ranked;
    std::vector<int> quota(C, L / C);
    for (int c = 0; c < L % C; ++c) ++quota[c];
    int total = 0;
    for (int c = 0; c < C; ++c) {
      ranked.push_back(preference_order(net, state, clusters[c]));
      total += quota[c];
    }
    if (total != L) fail(ErrorCode::InvalidArgument, "stratified quotas do not sum to L");
    std::vector<std::size_t> taken(C, 0);
    int shortfall = 0;
    for (int c = 0; c < C; ++c) {
      const std::size_t take = std::min<std::size_t>(quota[c], ranked[c].size());
      for (std::size_t k = 0; k < take; ++k) chosen.push_back(ranked[c][k]);
      taken[c] = take;
      shortfall += quota[c] - static_cast<int>(take);
    }
    // A cluster smaller than its quota hands the rest to the others in label order.
    for (int c = 0; c < C && shortfall > 0; ++c) {
      while (shortfall > 0 && taken[c] < ranked[c].size()) {
        chosen.push_back(ranked[c][taken[c]++]);
        --shortfall;
      }
    }
    require(shortfall == 0, "clusters cover fewer than L demand points");
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

PolicyDecision k_from_l_decide(const Network& net, const SystemState& state, int K, int L,
                               SelectionMethod method) {
  return kstop_decide_over(net, state, K, select_candidate_pool(net, state, L, method));
}

// ---- DVO -------------------------------------------------------------------

std::vector<NodeId> shortest_path(const Network& net, NodeId from, NodeId to) {
  std::vector<NodeId> path;
  for (NodeId at = from; at != to;) {
    at = net.next_step(at, to);
    path.push_back(at);
  }
  return path;
}

namespace {

DvoOutcome dvo_process(NodeId i) {
  DvoOutcome out;
  out.decision.action = i;
  out.commitment.mode = DvoMode::Processing;
  out.commitment.target = i;
  return out;
}

DvoOutcome dvo_switch(const Network& net, NodeId i, NodeId j) {
  DvoOutcome out;
  out.commitment.mode = DvoMode::Switching;
  out.commitment.target = j;
  out.commitment.path = shortest_path(net, i, j);
  out.decision.action = out.commitment.path.front();
  out.decision.chosen_sequence = DemandSequence{{j}};
  return out;
}

// Rule for a server with nothing to do at i: switch or stay idle.
DvoOutcome dvo_idle_rule(const Network& net, const SystemState& state) {
  const NodeId i = state.server;
  const double rho = net.rho();
  NodeId best1 = -1, best2 = -1;
  double phi1 = 0.0, phi2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  for (NodeId j = 0; j < net.demand_count(); ++j) {
    if (j == i) continue;
    const double leg = net.distance(i, j) / net.tau();
    const double cmu = net.cost(j) * net.mu(j);
    const double phi = cmu * (state.jobs[j] + net.lambda(j) * leg) / (state.jobs[j] + net.mu(j) * leg);
    if (phi > cmu * rho) {
      ++n1;
      if (best1 < 0 || phi > phi1 + kIndexTolerance) best1 = j, phi1 = phi;
    } else {
      ++n2;
      if (best2 < 0 || phi > phi2 + kIndexTolerance) best2 = j, phi2 = phi;
    }
  }
  const NodeId star = n1 > 0 ? best1 : best2;
  DvoOutcome out;
  if (star >= 0 && state.jobs[star] > net.lambda(star) * net.distance(star, i) / net.tau()) {
    out = dvo_switch(net, i, star);
  } else {
    out.decision.action = i;
    out.commitment.mode = DvoMode::Idle;
    out.commitment.target = i;
  }
  out.decision.trace.candidates = n1 + n2;
  out.decision.trace.sigma1 = n1;
  out.decision.trace.sigma2 = n2;
  out.decision.trace.sigma = n1 > 0 ? n1 : n2;
  return out;
}

}  // namespace

DvoOutcome dvo_decide(const Network& net, const SystemState& state, EpochKind epoch,
                      const DvoCommitment& current) {
  const NodeId i = state.server;
  require(net.is_demand(i), "DVO decisions are taken at demand points only");
  if (current.mode == DvoMode::Switching && current.target != i) {
    fail(ErrorCode::InvalidArgument, "DVO switch still in progress");
  }
  const int xi = state.jobs[i];

  switch (epoch) {
    case EpochKind::ArrivedAtPoint:
    case EpochKind::IdleArrival:
      // A job waiting at i is served at once; otherwise fall back to the idle rule.
      if (xi > 0) return dvo_process(i);
      return dvo_idle_rule(net, state);
    case EpochKind::JobFinished:
      break;
  }
  if (xi == 0) return dvo_idle_rule(net, state);

  const double rho = net.rho();
  const double own = net.cost(i) * net.mu(i);
  NodeId best = -1;
  double best_psi = 0.0;
  std::size_t considered = 0, eligible = 0;
  for (NodeId j = 0; j < net.demand_count(); ++j) {
    if (j == i) continue;
    const double cmu = net.cost(j) * net.mu(j);
    if (cmu < own) continue;
    ++considered;
    const double out_leg = net.distance(i, j) / net.tau();
    const double back_leg = net.distance(j, i) / net.tau();
    const double x = state.jobs[j];
    const double psi_j = cmu * (x + net.lambda(j) * out_leg) /
                         (x + net.mu(j) * out_leg + (net.mu(j) - net.lambda(j)) * back_leg);
    if (psi_j >= cmu * rho + own * (1.0 - rho)) {
      ++eligible;
      if (best < 0 || psi_j > best_psi + kIndexTolerance) best = j, best_psi = psi_j;
    }
  }
  DvoOutcome out = best >= 0 ? dvo_switch(net, i, best) : dvo_process(i);
  out.decision.trace.candidates = considered;
  out.decision.trace.sigma = eligible;
  return out;
}

// ---- Reference policies ------------------------------------------------------

PollingOutcome polling_decide(const Network& net, const SystemState& state, NodeId last_emptied) {
  const int d = net.demand_count();
  require(last_emptied >= 0 && last_emptied < d, "last emptied point out of range");
  const NodeId v = state.server;
  if (net.is_demand(v) && state.jobs[v] == 0) last_emptied = v;
  const NodeId target = (last_emptied + 1) % d;
  const NodeId action = v == target ? v : net.next_step(v, target);
  return {action, last_emptied};
}

NodeId serve_longest_queue_decide(const Network& net, const SystemState& state) {
  require(net.is_complete(), "serve-longest-queue needs a complete graph");
  const NodeId v = state.server;
  if (state.jobs[v] > 0 || net.demand_count() == 1) return v;
  NodeId best = -1;
  for (NodeId j = 0; j < net.demand_count(); ++j) {
    if (j == v) continue;
    if (best < 0 || state.jobs[j] > state.jobs[best]) best = j;
  }
  return best;
}

// ---- Policy objects ------------------------------------------------------------

std::string PolicySpec::label() const {
  switch (kind) {
    case Kind::Dvo:
      return "dvo";
    case Kind::KStop:
      return "kstop:" + std::to_string(k);
    case Kind::KFromL:
      return "kfroml:" + std::to_string(k) + ":" + std::to_string(l) + ":" +
             (method == SelectionMethod::Impartial ? "impartial" : "stratified");
    case Kind::Polling:
      return "polling";
    case Kind::Slq:
      return "slq";
  }
  return "";
}

PolicySpec parse_policy(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto bad = [&]() -> PolicySpec { fail(ErrorCode::Parse, "unrecognized policy '" + text + "'"); };
  auto positive = [&](const std::string& s) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(s, &used);
    } catch (const std::exception&) {
      bad();
    }
    if (used != s.size() || value < 1) bad();
    return value;
  };
  if (parts.empty()) return bad();
  PolicySpec spec;
  const std::string& head = parts[0];
  if (head == "dvo" && parts.size() == 1) {
    spec.kind = PolicySpec::Kind::Dvo;
  } else if (head == "polling" && parts.size() == 1) {
    spec.kind = PolicySpec::Kind::Polling;
  } else if (head == "slq" && parts.size() == 1) {
    spec.kind = PolicySpec::Kind::Slq;
  } else if (head == "kstop" && parts.size() == 2) {
    spec.kind = PolicySpec::Kind::KStop;
    spec.k = positive(parts[1]);
  } else if (head == "kfroml" && parts.size() == 4) {
    spec.kind = PolicySpec::Kind::KFromL;
    spec.k = positive(parts[1]);
    spec.l = positive(parts[2]);
    if (parts[3] == "impartial") {
      spec.method = SelectionMethod::Impartial;
    } else if (parts[3] == "stratified") {
      spec.method = SelectionMethod::Stratified;
    } else {
      return bad();
    }
  } else {
    return bad();
  }
  return spec;
}

CachedIndexPolicy::CachedIndexPolicy(const Network& net, PolicySpec spec, std::size_t cache_limit)
    : net_(net), spec_(spec), cache_limit_(cache_limit) {
  require(spec_.kind == PolicySpec::Kind::KStop || spec_.kind == PolicySpec::Kind::KFromL,
          "index policy must be K-stop or (K from L)");
  if (spec_.kind == PolicySpec::Kind::KFromL) {
    spec_.l = std::min(spec_.l, net.demand_count());
    if (spec_.method == SelectionMethod::Stratified) {
      require(!net.clusters().empty(), "stratified selection needs cluster labels");
    }
  }
}

NodeId CachedIndexPolicy::decide(const SystemState& state) {
  if (auto it = cache_.find(state); it != cache_.end()) return it->second;
  const NodeId action =
      spec_.kind == PolicySpec::Kind::KStop
          ? kstop_decide(net_, state, spec_.k).action
          : k_from_l_decide(net_, state, spec_.k, spec_.l, spec_.method).action;
  if (cache_.size() >= cache_limit_) cache_.clear();
  cache_.emplace(state, action);
  return action;
}

NodeId PollingPolicy::decide(const SystemState& state) {
  const auto out = polling_decide(net_, state, last_emptied_);
  last_emptied_ = out.last_emptied;
  return out.action;
}

LongestQueuePolicy::LongestQueuePolicy(const Network& net) : net_(net) {
  require(net.is_complete(), "serve-longest-queue needs a complete graph");
}

std::unique_ptr<Policy> make_policy(const Network& net, const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicySpec::Kind::Dvo:
      fail(ErrorCode::InvalidArgument, "DVO runs on the continuous-time simulator");
    case PolicySpec::Kind::KStop:
    case PolicySpec::Kind::KFromL:
      return std::make_unique<CachedIndexPolicy>(net, spec);
    case PolicySpec::Kind::Polling:
      return std::make_unique<PollingPolicy>(net);
    case PolicySpec::Kind::Slq:
      return std::make_unique<LongestQueuePolicy>(net);
  }
  fail(ErrorCode::InvalidArgument, "unknown policy kind");
}

}  // namespace jobsched
