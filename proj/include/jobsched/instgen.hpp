#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jobsched/network.hpp"
#include "jobsched/random.hpp"

namespace jobsched {

struct LayoutTag {
  enum class Kind { TwoCluster, Lattice, Custom };
  Kind kind = Kind::Custom;
  int d1 = 0;  // two-cluster only
  int d2 = 0;
  int n = 0;   // chain length for two-cluster, stage count otherwise

  std::string name() const;
};

/// A problem instance: topology, recorded rates, and generation metadata.
///
/// `rates` and `tau` hold the recorded (rounded) values. The model runs on
/// those values multiplied by `delta`, which is 1 unless the rounded rates
/// overshoot the unit budget.
struct InstanceSpec {
  Topology topology;
  std::vector<DemandRates> rates;
  double tau = 0.0;
  double delta = 1.0;
  LayoutTag layout;
  double target_rho = 0.0;
  double target_eta = 0.0;
  std::uint64_t seed = 0;
  std::string generator;
  int rejected = 0;  // draws discarded because rounding broke lambda < mu

  Network network() const;
};

// Rounds to two significant figures; zero stays zero.
double round_sig2(double x);

// Draws d demand rates and a switching rate, rescales the budget to one,
// rounds to two significant figures and sets delta from the rounded values.
// Returns false when rounding leaves some lambda_i >= mu_i.
bool draw_rates(RandomStream& rng, int d, InstanceSpec& out);

InstanceSpec generate_two_cluster(RandomStream& rng);
InstanceSpec generate_lattice(RandomStream& rng);

// Two-cluster instance whose demand count is at most max_demand: the layout
// is redrawn until it fits, then rates are drawn as usual.
InstanceSpec generate_two_cluster_small(RandomStream& rng, int max_demand);

// Layout name "two-cluster" or "lattice".
InstanceSpec generate_instance(const std::string& layout, std::uint64_t seed);

}  // namespace jobsched
