#pragma once

#include <algorithm>
#include <vector>

#include "jobsched/network.hpp"
#include "jobsched/random.hpp"

namespace fixtures {

using namespace jobsched;

inline std::vector<DemandRates> uniform_rates(int d, double lambda, double mu, double cost) {
  return std::vector<DemandRates>(d, DemandRates{lambda, mu, cost});
}

// Two demand points on the left, one on the right, three stages between.
inline Network two_one_chain(double lambda = 0.1, double mu = 0.5, double tau = 0.5) {
  return Network(build_two_cluster(2, 1, 3), uniform_rates(3, lambda, mu, 1.0), tau);
}

// Two demand points joined through one stage.
inline Network pair_via_stage(double lambda = 0.1, double mu = 0.5, double tau = 0.5) {
  return Network(build_two_cluster(1, 1, 1), uniform_rates(2, lambda, mu, 1.0), tau);
}

// Four points per cluster, four stages.
inline Network four_by_four(double lambda = 0.05, double mu = 0.5, double tau = 0.5) {
  return Network(build_two_cluster(4, 4, 4), uniform_rates(8, lambda, mu, 1.0), tau);
}

inline Network single_queue(double lambda = 0.2, double mu = 0.5, double cost = 1.0) {
  Topology t;
  t.node_count = 1;
  t.demand_count = 1;
  return Network(t, {{lambda, mu, cost}}, 0.5);
}

// Random rates on a topology, inside the unit budget, lambda < mu.
inline Network random_rates(RandomStream& rng, const Topology& topo, double max_load = 0.9) {
  const int d = topo.demand_count;
  std::vector<DemandRates> rates(d);
  const double rho = rng.uniform(0.05, max_load);
  std::vector<double> share(d);
  double total = 0.0;
  for (int i = 0; i < d; ++i) total += (share[i] = rng.uniform(0.1, 1.0));
  double peak = 0.0, lam = 0.0;
  for (int i = 0; i < d; ++i) {
    rates[i].mu = rng.uniform(0.1, 0.9);
    rates[i].lambda = share[i] / total * rho * rates[i].mu;
    rates[i].cost = rng.uniform(0.1, 0.9);
    peak = std::max(peak, rates[i].mu);
    lam += rates[i].lambda;
  }
  double tau = rng.uniform(0.1, 10.0) * lam;
  const double scale = 1.0 / (lam + std::max(peak, tau));
  for (auto& r : rates) {
    r.lambda *= scale;
    r.mu *= scale;
  }
  return Network(topo, rates, tau * scale);
}

}  // namespace fixtures
