#pragma once

#include <vector>

#include "jobsched/model.hpp"
#include "jobsched/network.hpp"

namespace jobsched {

/// Ordered, pairwise-distinct demand points the server is assumed to visit
/// and serve to exhaustion.
struct DemandSequence {
  std::vector<NodeId> stops;

  std::size_t size() const { return stops.size(); }
  NodeId front() const { return stops.front(); }
  bool contains(NodeId v) const;
  bool operator==(const DemandSequence&) const = default;
};

// Nonempty, in range, pairwise distinct; throws otherwise.
void validate_sequence(const Network& net, const DemandSequence& seq);

/// Running totals of a fluid route from its start node. Every quantity is
/// affine in the initial idle time t, so each carries its slope in t too.
struct RouteTotals {
  NodeId last = 0;
  double elapsed = 0.0;  // t + sum(leg + T)
  double busy = 0.0;     // sum T
  double reward = 0.0;   // sum R
  double elapsed_slope = 1.0;
  double busy_slope = 0.0;
  double reward_slope = 0.0;
  double last_exhaust = 0.0;  // T of the most recent stop
  double last_leg = 0.0;      // travel time into the most recent stop

  static RouteTotals start(NodeId origin, double idle);
  // Appends demand point j; T_j = (x_j + lambda_j * arrival) / (mu_j - lambda_j).
  RouteTotals extend(const Network& net, const std::vector<int>& jobs, NodeId j) const;

  double psi() const { return elapsed > 0.0 ? reward / elapsed : 0.0; }
  double xi() const { return elapsed > 0.0 ? busy / elapsed : 0.0; }
  // Reward per unit of busy time; 0 on an empty route.
  double busy_reward_rate() const { return busy > 0.0 ? reward / busy : 0.0; }
  // Sign of d psi / dt at this idle time, from the affine coefficients.
  int psi_slope_sign() const;
};

/// All per-stop and aggregate fluid quantities for one route.
struct FluidEvaluation {
  std::vector<double> exhaust;  // T_j
  std::vector<double> reward;   // R_j
  std::vector<double> phi;
  std::vector<double> beta;     // empty when the server is not at a demand point
  double psi = 0.0;
  double gamma = 0.0;
  double xi = 0.0;
  int psi_derivative_sign = 0;
};

// Evaluates a route without the first-stop restriction. Used directly when
// the server is hypothetically relocated onto the first stop.
FluidEvaluation evaluate_route(const Network& net, const SystemState& state,
                               const DemandSequence& seq, double idle);

// The public operations below require seq.front() != state.server.
std::vector<double> exhaust_times(const Network& net, const SystemState& state,
                                  const DemandSequence& seq, double idle);
double psi(const Network& net, const SystemState& state, const DemandSequence& seq, double idle);
std::vector<double> phi(const Network& net, const SystemState& state, const DemandSequence& seq,
                        double idle);
std::vector<double> beta(const Network& net, const SystemState& state, const DemandSequence& seq,
                         double idle);
double gamma(const Network& net, const SystemState& state, const DemandSequence& seq, double idle);
double xi(const Network& net, const SystemState& state, const DemandSequence& seq, double idle);

constexpr double kDerivativeProbe = 1e-6;

// psi(eps) - psi(0), evaluated as eps * cross / (D(0) * D(eps)) from the
// affine numerator and denominator so that it has no cancellation error.
double psi_probe_difference(const Network& net, const SystemState& state,
                            const DemandSequence& seq, double epsilon = kDerivativeProbe);

// sign(psi(eps) - psi(0)) in {-1, 0, +1}. By monotonicity in t the sign does
// not depend on eps > 0; a cross term within 1e-12 relative is reported as 0.
int psi_derivative_sign(const Network& net, const SystemState& state, const DemandSequence& seq,
                        double epsilon = kDerivativeProbe);

}  // namespace jobsched
