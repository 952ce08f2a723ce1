#include "jobsched/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

constexpr double kRelativeZero = 1e-12;

void check_first_stop(const SystemState& state, const DemandSequence& seq) {
  if (seq.front() == state.server) {
    fail(ErrorCode::InvalidArgument, "first stop must differ from the server node");
  }
}

}  // namespace

bool DemandSequence::contains(NodeId v) const {
  return std::find(stops.begin(), stops.end(), v) != stops.end();
}

void validate_sequence(const Network& net, const DemandSequence& seq) {
  require(!seq.stops.empty(), "demand sequence must be nonempty");
  for (std::size_t a = 0; a < seq.size(); ++a) {
    require(net.is_demand(seq.stops[a]), "sequence element is not a demand point");
    for (std::size_t b = a + 1; b < seq.size(); ++b)
      require(seq.stops[a] != seq.stops[b], "sequence elements must be distinct");
  }
}

RouteTotals RouteTotals::start(NodeId origin, double idle) {
  RouteTotals r;
  r.last = origin;
  r.elapsed = idle;
  return r;
}

RouteTotals RouteTotals::extend(const Network& net, const std::vector<int>& jobs, NodeId j) const {
  const double lam = net.lambda(j);
  const double mu = net.mu(j);
  const double drain = mu - lam;
  RouteTotals r = *this;
  r.last = j;
  r.last_leg = static_cast<double>(net.distance(last, j)) / net.tau();
  const double arrival = elapsed + r.last_leg;
  r.last_exhaust = (static_cast<double>(jobs[j]) + lam * arrival) / drain;
  const double exhaust_slope = lam * elapsed_slope / drain;
  const double cmu = net.cost(j) * mu;
  r.elapsed = arrival + r.last_exhaust;
  r.busy += r.last_exhaust;
  r.reward += cmu * r.last_exhaust;
  r.elapsed_slope += exhaust_slope;
  r.busy_slope += exhaust_slope;
  r.reward_slope += cmu * exhaust_slope;
  return r;
}

int RouteTotals::psi_slope_sign() const {
  // psi = (a1 + b1 t) / (a2 + b2 t) has derivative sign(a2 b1 - a1 b2).
  const double lhs = elapsed * reward_slope;
  const double rhs = reward * elapsed_slope;
  const double cross = lhs - rhs;
  if (std::abs(cross) <= kRelativeZero * (std::abs(lhs) + std::abs(rhs))) return 0;
  return cross > 0.0 ? 1 : -1;
}

FluidEvaluation evaluate_route(const Network& net, const SystemState& state,
                               const DemandSequence& seq, double idle) {
  validate_sequence(net, seq);
  require(idle >= 0.0, "idle time must be nonnegative");
  const NodeId v = state.server;
  const bool at_demand = net.is_demand(v);
  for (NodeId j : seq.stops) {
    if (!(net.mu(j) > net.lambda(j))) {
      fail(ErrorCode::InvalidArgument,
           "processing rate must exceed arrival rate at stop " + std::to_string(j + 1));
    }
  }

  FluidEvaluation ev;
  const double rho = net.rho();
  RouteTotals totals = RouteTotals::start(v, idle);
  bool visited_origin = false;
  for (NodeId j : seq.stops) {
    totals = totals.extend(net, state.jobs, j);
    visited_origin = visited_origin || j == v;
    ev.exhaust.push_back(totals.last_exhaust);
    ev.reward.push_back(net.cost(j) * net.mu(j) * totals.last_exhaust);
    const double back = static_cast<double>(net.distance(j, v)) / net.tau();
    ev.phi.push_back(totals.reward / (totals.elapsed + back));
    if (at_demand) {
      ev.beta.push_back(visited_origin ? 0.0
                                       : totals.busy_reward_rate() * rho +
                                             net.cost(v) * net.mu(v) * (1.0 - rho));
    }
  }
  ev.psi = totals.psi();
  ev.gamma = totals.busy_reward_rate() * rho;
  ev.xi = totals.xi();
  ev.psi_derivative_sign = totals.psi_slope_sign();
  return ev;
}

std::vector<double> exhaust_times(const Network& net, const SystemState& state,
                                  const DemandSequence& seq, double idle) {
  validate_sequence(net, seq);
  return evaluate_route(net, state, seq, idle).exhaust;
}

double psi(const Network& net, const SystemState& state, const DemandSequence& seq, double idle) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  return evaluate_route(net, state, seq, idle).psi;
}

std::vector<double> phi(const Network& net, const SystemState& state, const DemandSequence& seq,
                        double idle) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  return evaluate_route(net, state, seq, idle).phi;
}

std::vector<double> beta(const Network& net, const SystemState& state, const DemandSequence& seq,
                         double idle) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  require(net.is_demand(state.server), "beta needs the server at a demand point");
  return evaluate_route(net, state, seq, idle).beta;
}

double gamma(const Network& net, const SystemState& state, const DemandSequence& seq, double idle) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  return evaluate_route(net, state, seq, idle).gamma;
}

double xi(const Network& net, const SystemState& state, const DemandSequence& seq, double idle) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  return evaluate_route(net, state, seq, idle).xi;
}

double psi_probe_difference(const Network& net, const SystemState& state,
                            const DemandSequence& seq, double epsilon) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  require(epsilon > 0.0, "probe width must be positive");
  RouteTotals totals = RouteTotals::start(state.server, 0.0);
  for (NodeId j : seq.stops) totals = totals.extend(net, state.jobs, j);
  const double cross = totals.elapsed * totals.reward_slope - totals.reward * totals.elapsed_slope;
  const double d0 = totals.elapsed;
  const double d_eps = totals.elapsed + epsilon * totals.elapsed_slope;
  return epsilon * cross / (d0 * d_eps);
}

int psi_derivative_sign(const Network& net, const SystemState& state, const DemandSequence& seq,
                        double epsilon) {
  validate_sequence(net, seq);
  check_first_stop(state, seq);
  require(epsilon > 0.0, "probe width must be positive");
  RouteTotals totals = RouteTotals::start(state.server, 0.0);
  for (NodeId j : seq.stops) totals = totals.extend(net, state.jobs, j);
  return totals.psi_slope_sign();
}

}  // namespace jobsched
