#include "jobsched/instgen.hpp"

#include <algorithm>
#include <cmath>

#include "jobsched/error.hpp"

namespace jobsched {

namespace {

constexpr const char* kGeneratorVersion = "jobsched-gen/1";

// Gives up on a seed that keeps producing unusable roundings.
constexpr int kMaxRejections = 1000;

template <typename Layout>
InstanceSpec generate_with(RandomStream& rng, Layout draw_layout) {
  InstanceSpec spec;
  for (int attempt = 0; attempt <= kMaxRejections; ++attempt) {
    draw_layout(spec);
    if (draw_rates(rng, spec.topology.demand_count, spec)) {
      spec.seed = rng.seed();
      spec.generator = kGeneratorVersion;
      spec.rejected = attempt;
      return spec;
    }
  }
  fail(ErrorCode::Model, "instance generation kept failing after rounding");
}

}  // namespace

std::string LayoutTag::name() const {
  switch (kind) {
    case Kind::TwoCluster:
      return "two-cluster";
    case Kind::Lattice:
      return "lattice";
    case Kind::Custom:
      return "custom";
  }
  return "custom";
}

Network InstanceSpec::network() const {
  std::vector<DemandRates> scaled = rates;
  for (auto& r : scaled) {
    r.lambda *= delta;
    r.mu *= delta;
  }
  return Network(topology, std::move(scaled), tau * delta);
}

double round_sig2(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double scale = std::pow(10.0, 1 - exponent);
  return std::round(x * scale) / scale;
}

bool draw_rates(RandomStream& rng, int d, InstanceSpec& out) {
  require(d >= 1, "need at least one demand point");
  const double rho = rng.uniform(0.1, 0.9);
  std::vector<double> mu(d), load(d), lambda(d), cost(d);
  for (int i = 0; i < d; ++i) mu[i] = rng.uniform(0.1, 0.9);
  double load_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    const double raw = rng.uniform(0.1 * mu[i], mu[i]);
    load[i] = raw / mu[i];
    load_sum += load[i];
  }
  for (int i = 0; i < d; ++i) lambda[i] = load[i] / load_sum * rho * mu[i];
  for (int i = 0; i < d; ++i) cost[i] = rng.uniform(0.1, 0.9);
  const double p = rng.uniform();
  const double eta = p < 0.5 ? rng.uniform(0.1, 1.0) : rng.uniform(1.0, 10.0);

  double lambda_sum = 0.0;
  for (double l : lambda) lambda_sum += l;
  double tau = eta * lambda_sum;
  const double peak = std::max(tau, *std::max_element(mu.begin(), mu.end()));
  const double scale = 1.0 / (lambda_sum + peak);

  out.rates.assign(d, {});
  for (int i = 0; i < d; ++i) {
    out.rates[i].lambda = round_sig2(lambda[i] * scale);
    out.rates[i].mu = round_sig2(mu[i] * scale);
    out.rates[i].cost = cost[i];
    if (!(out.rates[i].lambda < out.rates[i].mu) || out.rates[i].lambda <= 0.0) return false;
  }
  out.tau = round_sig2(tau * scale);
  out.target_rho = rho;
  out.target_eta = eta;

  double budget = out.tau;
  double arrivals = 0.0;
  for (const auto& r : out.rates) {
    budget = std::max(budget, r.mu);
    arrivals += r.lambda;
  }
  budget += arrivals;
  out.delta = budget > 1.0 ? 1.0 / budget : 1.0;
  return true;
}

InstanceSpec generate_two_cluster(RandomStream& rng) {
  return generate_with(rng, [&](InstanceSpec& spec) {
    const int d1 = rng.uniform_int(1, 4);
    const int d2 = rng.uniform_int(1, 4);
    const int n = rng.uniform_int(1, 6);
    spec.topology = build_two_cluster(d1, d2, n);
    spec.layout = {LayoutTag::Kind::TwoCluster, d1, d2, n};
  });
}

InstanceSpec generate_two_cluster_small(RandomStream& rng, int max_demand) {
  require(max_demand >= 2, "two-cluster layouts have at least two demand points");
  return generate_with(rng, [&](InstanceSpec& spec) {
    int d1, d2;
    do {
      d1 = rng.uniform_int(1, 4);
      d2 = rng.uniform_int(1, 4);
    } while (d1 + d2 > max_demand);
    const int n = rng.uniform_int(1, 6);
    spec.topology = build_two_cluster(d1, d2, n);
    spec.layout = {LayoutTag::Kind::TwoCluster, d1, d2, n};
  });
}

InstanceSpec generate_lattice(RandomStream& rng) {
  return generate_with(rng, [&](InstanceSpec& spec) {
    const int d = rng.uniform_int(2, 8);
    LatticeLayout lattice = build_random_lattice(rng, d);
    spec.topology = std::move(lattice.topology);
    spec.layout = {LayoutTag::Kind::Lattice, 0, 0, spec.topology.node_count - d};
  });
}

InstanceSpec generate_instance(const std::string& layout, std::uint64_t seed) {
  RandomStream rng(seed);
  if (layout == "two-cluster") return generate_two_cluster(rng);
  if (layout == "lattice") return generate_lattice(rng);
  fail(ErrorCode::InvalidArgument, "unknown layout '" + layout + "'");
}

}  // namespace jobsched
