#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jobsched/dp.hpp"
#include "jobsched/instgen.hpp"

namespace jobsched {

// First line of every results file; bump when the column layout changes.
inline constexpr const char* kResultsHeader = "# jobsched-results v1";

struct CampaignConfig {
  std::string layout = "two-cluster";  // or "lattice"
  int max_demand = 0;                  // two-cluster only; 0 means no cap
  std::uint64_t instances = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> policies{"dvo", "kstop:1"};
  std::uint64_t warmup = 10'000;     // steps, or time units for DVO
  std::uint64_t horizon = 1'000'000;
  bool solve_dp = false;
  FeasibilityLimits limits;
  int workers = 1;
  std::string output;  // CSV path; rows already present are kept and skipped
  std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

struct ResultRow {
  std::uint64_t instance_id = 0;
  std::uint64_t seed = 0;
  std::string layout;
  int d = 0;
  int d1 = 0;
  int d2 = 0;
  int n = 0;
  double rho = 0.0;
  double eta = 0.0;
  std::map<std::string, double> cost;  // by policy label
  std::optional<double> g_star;
  std::optional<bool> feasible;
  std::string status = "ok";
};

struct ResultsTable {
  std::vector<std::string> policies;
  std::vector<ResultRow> rows;
};

// Instance i of a campaign: seeds derive from (campaign seed, i).
InstanceSpec campaign_instance(const CampaignConfig& config, std::uint64_t index);

// Simulates every policy on one instance under a shared random stream and,
// when asked, classifies it with the DP feasibility loop. Errors land in the
// row's status instead of propagating.
ResultRow evaluate_instance(const CampaignConfig& config, std::uint64_t index);

// Runs the sweep and writes the results file sorted by instance id.
ResultsTable run_campaign(const CampaignConfig& config);

std::string results_to_csv(const ResultsTable& table);
ResultsTable results_from_csv(const std::string& text);
ResultsTable read_results(const std::string& path);

enum class BucketBy { None, Stages, RhoBand, EtaBand };

BucketBy parse_bucket(const std::string& text);

struct AggregateRow {
  std::string comparison;  // e.g. "kstop:1 vs dvo"
  std::string bucket;      // "all", "n=3", "rho[0.1,0.3)", ...
  std::size_t count = 0;
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 s / sqrt(count)
  double p10 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;
};

// Nearest-rank percentile of an ascending sample, p in (0, 100].
double nearest_rank(const std::vector<double>& sorted, double p);

// Summary statistics of one sample (order irrelevant).
AggregateRow summarize(std::vector<double> values);

// baseline == "dp": percentage suboptimality 100 (g - g*) / g* over rows with
// a feasible g*. Otherwise percentage improvement 100 (g_b - g) / g_b of each
// other policy over the baseline. Empty buckets are omitted.
std::vector<AggregateRow> aggregate(const ResultsTable& table, BucketBy bucket,
                                    const std::string& baseline);

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

}  // namespace jobsched
