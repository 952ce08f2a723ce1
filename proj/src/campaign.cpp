#include "jobsched/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "jobsched/error.hpp"
#include "jobsched/heuristics.hpp"
#include "jobsched/io.hpp"
#include "jobsched/random.hpp"
#include "jobsched/sim.hpp"

namespace jobsched {

namespace {

constexpr std::uint64_t kSimStream = 1;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string format_double(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

// Status text must not break the comma-separated layout.
std::string clean_status(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return s;
}

std::vector<std::string> fixed_columns() {
  return {"instance_id", "seed", "layout", "d", "d1", "d2", "n", "rho", "eta"};
}

std::string header_line(const std::vector<std::string>& policies) {
  std::string line;
  for (const auto& c : fixed_columns()) line += c + ",";
  for (const auto& p : policies) line += "cost:" + p + ",";
  line += "g_star,feasible,status";
  return line;
}

std::string row_line(const ResultRow& r, const std::vector<std::string>& policies) {
  std::ostringstream ss;
  ss << r.instance_id << ',' << r.seed << ',' << r.layout << ',' << r.d << ',' << r.d1 << ','
     << r.d2 << ',' << r.n << ',' << format_double(r.rho) << ',' << format_double(r.eta) << ',';
  for (const auto& p : policies) {
    auto it = r.cost.find(p);
    if (it != r.cost.end()) ss << format_double(it->second);
    ss << ',';
  }
  if (r.g_star) ss << format_double(*r.g_star);
  ss << ',';
  if (r.feasible) ss << (*r.feasible ? 1 : 0);
  ss << ',' << clean_status(r.status);
  return ss.str();
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "bad number '" + s + "' in results file");
  }
}

std::string band_label(const char* name, double lo, double hi) {
  std::ostringstream ss;
  ss << name << '[' << lo << ',' << hi << ')';
  return ss.str();
}

std::optional<std::string> bucket_of(const ResultRow& r, BucketBy by) {
  static const double rho_edges[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  static const double eta_edges[] = {0.1, 0.4, 0.7, 1.0, 4.0, 7.0, 10.0};
  switch (by) {
    case BucketBy::None:
      return std::string("all");
    case BucketBy::Stages:
      return "n=" + std::to_string(r.n);
    case BucketBy::RhoBand:
      for (int k = 0; k < 4; ++k)
        if (r.rho >= rho_edges[k] && r.rho < rho_edges[k + 1])
          return band_label("rho", rho_edges[k], rho_edges[k + 1]);
      return std::nullopt;
    case BucketBy::EtaBand:
      for (int k = 0; k < 6; ++k)
        if (r.eta >= eta_edges[k] && r.eta < eta_edges[k + 1])
          return band_label("eta", eta_edges[k], eta_edges[k + 1]);
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

InstanceSpec campaign_instance(const CampaignConfig& config, std::uint64_t index) {
  RandomStream rng(derive_seed(config.seed, index));
  if (config.layout == "two-cluster") {
    return config.max_demand > 0 ? generate_two_cluster_small(rng, config.max_demand)
                                 : generate_two_cluster(rng);
  }
  if (config.layout == "lattice") return generate_lattice(rng);
  fail(ErrorCode::InvalidArgument, "unknown layout '" + config.layout + "'");
}

ResultRow evaluate_instance(const CampaignConfig& config, std::uint64_t index) {
  ResultRow row;
  row.instance_id = index;
  row.layout = config.layout;
  try {
    const InstanceSpec spec = campaign_instance(config, index);
    const Network net = spec.network();
    row.seed = spec.seed;
    row.d = net.demand_count();
    row.d1 = spec.layout.d1;
    row.d2 = spec.layout.d2;
    row.n = net.stage_count();
    row.rho = net.rho();
    row.eta = net.eta();
    const std::uint64_t sim_seed = derive_seed(spec.seed, kSimStream);
    for (const auto& label : config.policies) {
      const PolicySpec policy = parse_policy(label);
      if (policy.kind == PolicySpec::Kind::Dvo) {
        row.cost[label] = simulate_dvo(net, sim_seed, static_cast<double>(config.warmup),
                                       static_cast<double>(config.horizon))
                              .average_cost;
      } else {
        auto runner = make_policy(net, policy);
        row.cost[label] =
            simulate_discrete(net, *runner, sim_seed, config.warmup, config.horizon).average_cost;
      }
    }
    if (config.solve_dp) {
      const FeasibilityResult dp = feasibility_escalation(net, config.limits);
      row.feasible = dp.feasible;
      if (dp.feasible) row.g_star = dp.g_star;
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

std::string results_to_csv(const ResultsTable& table) {
  std::string out = std::string(kResultsHeader) + "\n" + header_line(table.policies) + "\n";
  for (const auto& r : table.rows) out += row_line(r, table.policies) + "\n";
  return out;
}

ResultsTable results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    fail(ErrorCode::Parse, "results file lacks the version header");
  }
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "results file lacks a column line");
  const auto columns = split(line, ',');
  const auto fixed = fixed_columns();
  if (columns.size() < fixed.size() + 3 ||
      !std::equal(fixed.begin(), fixed.end(), columns.begin())) {
    fail(ErrorCode::Parse, "unexpected results columns");
  }
  ResultsTable table;
  const std::size_t first_policy = fixed.size();
  const std::size_t tail = columns.size() - 3;
  for (std::size_t c = first_policy; c < tail; ++c) {
    if (columns[c].rfind("cost:", 0) != 0) fail(ErrorCode::Parse, "unexpected results columns");
    table.policies.push_back(columns[c].substr(5));
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size()) fail(ErrorCode::Parse, "results row has the wrong width");
    ResultRow r;
    r.instance_id = static_cast<std::uint64_t>(std::stoull(cells[0]));
    r.seed = static_cast<std::uint64_t>(std::stoull(cells[1]));
    r.layout = cells[2];
    r.d = std::stoi(cells[3]);
    r.d1 = std::stoi(cells[4]);
    r.d2 = std::stoi(cells[5]);
    r.n = std::stoi(cells[6]);
    r.rho = parse_number(cells[7]);
    r.eta = parse_number(cells[8]);
    for (std::size_t c = first_policy; c < tail; ++c)
      if (!cells[c].empty()) r.cost[table.policies[c - first_policy]] = parse_number(cells[c]);
    if (!cells[tail].empty()) r.g_star = parse_number(cells[tail]);
    if (!cells[tail + 1].empty()) r.feasible = cells[tail + 1] == "1";
    r.status = cells[tail + 2];
    table.rows.push_back(std::move(r));
  }
  return table;
}

ResultsTable read_results(const std::string& path) { return results_from_csv(read_text_file(path)); }

ResultsTable run_campaign(const CampaignConfig& config) {
  require(!config.policies.empty(), "campaign needs at least one policy");
  for (const auto& p : config.policies) parse_policy(p);
  require(config.horizon > 0, "horizon must be positive");

  ResultsTable table;
  table.policies = config.policies;
  std::set<std::uint64_t> done;
  if (!config.output.empty() && std::filesystem::exists(config.output)) {
    ResultsTable previous = read_results(config.output);
    if (previous.policies != config.policies) {
      fail(ErrorCode::InvalidArgument, "existing results file has a different policy list");
    }
    for (auto& r : previous.rows) {
      if (r.instance_id < config.instances && done.insert(r.instance_id).second) {
        table.rows.push_back(std::move(r));
      }
    }
  }

  std::vector<std::uint64_t> todo;
  for (std::uint64_t i = 0; i < config.instances; ++i)
    if (!done.count(i)) todo.push_back(i);

  std::ofstream sink;
  if (!config.output.empty()) {
    // Rewrite what we kept, then append rows as they finish so that an
    // interrupted run can resume.
    write_text_file(config.output, results_to_csv(table));
    sink.open(config.output, std::ios::app);
    if (!sink) fail(ErrorCode::Io, "cannot append to '" + config.output + "'");
  }

  std::mutex guard;
  std::atomic<std::size_t> cursor{0};
  std::uint64_t finished = done.size();
  auto work = [&]() {
    for (std::size_t k = cursor++; k < todo.size(); k = cursor++) {
      ResultRow row = evaluate_instance(config, todo[k]);
      std::lock_guard<std::mutex> lock(guard);
      if (sink.is_open()) sink << row_line(row, config.policies) << '\n' << std::flush;
      table.rows.push_back(std::move(row));
      ++finished;
      if (config.progress) config.progress(finished, config.instances);
    }
  };
  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(todo.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (sink.is_open()) sink.close();

  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.instance_id < b.instance_id; });
  if (!config.output.empty()) write_text_file(config.output, results_to_csv(table));
  return table;
}

BucketBy parse_bucket(const std::string& text) {
  if (text == "none") return BucketBy::None;
  if (text == "n") return BucketBy::Stages;
  if (text == "rho_band") return BucketBy::RhoBand;
  if (text == "eta_band") return BucketBy::EtaBand;
  fail(ErrorCode::InvalidArgument, "unknown bucket '" + text + "' (none, n, rho_band, eta_band)");
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  require(!sorted.empty(), "percentile of an empty sample");
  require(p > 0.0 && p <= 100.0, "percentile must be in (0, 100]");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

AggregateRow summarize(std::vector<double> values) {
  require(!values.empty(), "cannot summarize an empty sample");
  std::sort(values.begin(), values.end());
  AggregateRow row;
  row.count = values.size();
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  row.p10 = nearest_rank(values, 10);
  row.p25 = nearest_rank(values, 25);
  row.p50 = nearest_rank(values, 50);
  row.p75 = nearest_rank(values, 75);
  row.p90 = nearest_rank(values, 90);
  return row;
}

std::vector<AggregateRow> aggregate(const ResultsTable& table, BucketBy bucket,
                                    const std::string& baseline) {
  require(!table.rows.empty(), "no results to aggregate");
  const bool versus_dp = baseline == "dp";
  if (!versus_dp &&
      std::find(table.policies.begin(), table.policies.end(), baseline) == table.policies.end()) {
    fail(ErrorCode::InvalidArgument, "baseline '" + baseline + "' is not in the results");
  }
  // comparison -> bucket -> sample; std::map keeps the output order stable.
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  for (const auto& r : table.rows) {
    if (r.status != "ok") continue;
    const auto key = bucket_of(r, bucket);
    if (!key) continue;
    for (const auto& policy : table.policies) {
      auto it = r.cost.find(policy);
      if (it == r.cost.end()) continue;
      if (versus_dp) {
        if (!r.feasible.value_or(false) || !r.g_star || *r.g_star <= 0.0) continue;
        samples[policy + " vs dp"][*key].push_back(100.0 * (it->second - *r.g_star) / *r.g_star);
      } else {
        if (policy == baseline) continue;
        auto base = r.cost.find(baseline);
        if (base == r.cost.end() || base->second <= 0.0) continue;
        samples[policy + " vs " + baseline][*key].push_back(100.0 * (base->second - it->second) /
                                                            base->second);
      }
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& policy : table.policies) {
    const std::string label = policy + " vs " + (versus_dp ? std::string("dp") : baseline);
    auto it = samples.find(label);
    if (it == samples.end()) continue;
    for (auto& [key, values] : it->second) {
      AggregateRow row = summarize(values);
      row.comparison = label;
      row.bucket = key;
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream ss;
  ss << "comparison,bucket,count,mean,half_width,p10,p25,p50,p75,p90\n";
  ss << std::setprecision(6);
  for (const auto& r : rows) {
    ss << r.comparison << ',' << r.bucket << ',' << r.count << ',' << r.mean << ',' << r.half_width
       << ',' << r.p10 << ',' << r.p25 << ',' << r.p50 << ',' << r.p75 << ',' << r.p90 << '\n';
  }
  return ss.str();
}

}  // namespace jobsched
