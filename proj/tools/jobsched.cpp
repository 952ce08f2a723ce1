// Command-line front end. Talks to the library only through the C interface.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jobsched/jobsched.h"

namespace {

struct OwnedString {
  char* text = nullptr;
  ~OwnedString() { jobsched_string_free(text); }
  std::string str() const { return text ? std::string(text) : std::string(); }
};

struct InstanceDeleter {
  void operator()(jobsched_instance* p) const { jobsched_instance_free(p); }
};
using InstancePtr = std::unique_ptr<jobsched_instance, InstanceDeleter>;

int report(jobsched_status status) {
  if (status != JOBSCHED_OK) std::cerr << "error: " << jobsched_last_error() << "\n";
  return status == JOBSCHED_OK ? 0 : static_cast<int>(status);
}

InstancePtr load(const std::string& path, int& code) {
  jobsched_instance* raw = nullptr;
  code = report(jobsched_instance_load(path.c_str(), &raw));
  return InstancePtr(raw);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text << "\n";
}

int workers_from_env() {
  const char* env = std::getenv("JOBSCHED_WORKERS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

void print_progress(uint64_t done, uint64_t total, void*) {
  std::fprintf(stderr, "\r%llu/%llu instances", static_cast<unsigned long long>(done),
               static_cast<unsigned long long>(total));
  if (done == total) std::fprintf(stderr, "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic job scheduling on networks: simulate index heuristics and solve the MDP"};
  app.set_version_flag("--version", std::string(jobsched_version()));
  app.require_subcommand(1);

  // gen-instance
  std::string layout = "two-cluster", out;
  uint64_t seed = 1;
  auto* gen = app.add_subcommand("gen-instance", "Draw a random instance");
  gen->add_option("--layout", layout, "two-cluster or lattice")
      ->check(CLI::IsMember({"two-cluster", "lattice"}));
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out, "Output path (stdout if omitted)");

  // simulate
  std::string instance, policy = "kstop:1", csv;
  uint64_t warmup = 10000, horizon = 1000000;
  auto* sim = app.add_subcommand("simulate", "Simulate one policy on an instance");
  sim->add_option("--instance", instance, "Instance JSON")->required();
  sim->add_option("--policy", policy, "dvo | kstop:K | kfroml:K:L:impartial|stratified | polling | slq");
  sim->add_option("--seed", seed, "Random stream seed");
  sim->add_option("--warmup", warmup, "Warm-up steps (time units for dvo)");
  sim->add_option("--horizon", horizon, "Measured steps (time units for dvo)");
  sim->add_option("--csv", csv, "Append a result row to this CSV file");

  // dp-solve
  int m = 50;
  double tol = 1e-7, time_limit = 600.0;
  int64_t max_iters = 1000000;
  uint64_t state_limit = 1000000;
  bool escalate = false;
  auto* dp = app.add_subcommand("dp-solve", "Optimal average cost of the truncated MDP");
  dp->add_option("--instance", instance, "Instance JSON")->required();
  dp->add_option("--m", m, "Queue cap per demand point");
  dp->add_option("--tol", tol, "Span tolerance");
  dp->add_option("--max-iters", max_iters, "Iteration cap");
  dp->add_flag("--escalate", escalate, "Run the feasibility loop (m = 10, 20, ...) instead");
  dp->add_option("--state-limit", state_limit, "Escalation state-count limit");
  dp->add_option("--time-limit", time_limit, "Escalation per-solve time limit in seconds");

  // campaign
  uint64_t instances = 10;
  int max_demand = 0, workers = workers_from_env();
  std::string policies = "dvo,kstop:1,kstop:2";
  bool solve_dp = false;
  auto* camp = app.add_subcommand("campaign", "Sweep random instances and policies into a CSV");
  camp->add_option("--layout", layout, "two-cluster or lattice")
      ->check(CLI::IsMember({"two-cluster", "lattice"}));
  camp->add_option("--instances", instances, "Number of instances");
  camp->add_option("--seed", seed, "Campaign seed");
  camp->add_option("--policies", policies, "Comma-separated policy list");
  camp->add_option("--warmup", warmup, "Warm-up steps (time units for dvo)");
  camp->add_option("--horizon", horizon, "Measured steps (time units for dvo)");
  camp->add_option("--max-demand", max_demand, "Redraw two-cluster layouts above this demand count");
  camp->add_flag("--dp", solve_dp, "Also classify with the DP feasibility loop");
  camp->add_option("--state-limit", state_limit, "DP state-count limit");
  camp->add_option("--time-limit", time_limit, "DP per-solve time limit in seconds");
  camp->add_option("--workers", workers, "Worker threads (default: JOBSCHED_WORKERS or 1)");
  camp->add_option("--out", out, "Results CSV (resumed if present)")->required();

  // aggregate
  std::string results, bucket = "none", baseline = "dp";
  auto* agg = app.add_subcommand("aggregate", "Summarize a results CSV");
  agg->add_option("--results", results, "Results CSV")->required();
  agg->add_option("--bucket", bucket, "none | n | rho_band | eta_band")
      ->check(CLI::IsMember({"none", "n", "rho_band", "eta_band"}));
  agg->add_option("--baseline", baseline, "Policy label, or dp for suboptimality");
  agg->add_option("--out", out, "Output CSV (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      jobsched_instance* raw = nullptr;
      if (int c = report(jobsched_instance_generate(layout.c_str(), seed, &raw))) return c;
      InstancePtr inst(raw);
      OwnedString json;
      if (int c = report(jobsched_instance_to_json(inst.get(), &json.text))) return c;
      emit(json.str(), out);
      return 0;
    }

    if (*sim) {
      int code = 0;
      InstancePtr inst = load(instance, code);
      if (code) return code;
      OwnedString json;
      if (int c = report(jobsched_simulate(inst.get(), policy.c_str(), seed, warmup, horizon, &json.text)))
        return c;
      std::cout << json.str() << "\n";
      if (!csv.empty()) {
        const auto r = nlohmann::json::parse(json.str());
        const bool fresh = !std::ifstream(csv).good();
        std::ofstream f(csv, std::ios::app);
        if (!f) throw std::runtime_error("cannot append to " + csv);
        if (fresh) f << "instance,policy,seed,warmup,horizon,average_cost,half_width\n";
        f << instance << ',' << policy << ',' << seed << ',' << warmup << ',' << horizon << ','
          << r.at("average_cost").get<double>() << ',' << r.at("half_width").get<double>() << "\n";
      }
      return 0;
    }

    if (*dp) {
      int code = 0;
      InstancePtr inst = load(instance, code);
      if (code) return code;
      OwnedString json;
      jobsched_status status;
      if (escalate) {
        nlohmann::json limits{{"state_limit", state_limit},
                              {"time_limit_seconds", time_limit},
                              {"tolerance", tol},
                              {"max_iters", max_iters}};
        status = jobsched_dp_feasibility(inst.get(), limits.dump().c_str(), &json.text);
      } else {
        status = jobsched_dp_solve(inst.get(), m, tol, max_iters, &json.text);
      }
      if (json.text) std::cout << json.str() << "\n";
      return report(status);
    }

    if (*camp) {
      std::vector<std::string> list;
      std::stringstream ss(policies);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) list.push_back(item);
      nlohmann::json config{{"layout", layout},       {"max_demand", max_demand},
                            {"instances", instances}, {"seed", seed},
                            {"policies", list},       {"warmup", warmup},
                            {"horizon", horizon},     {"solve_dp", solve_dp},
                            {"workers", workers},     {"output", out},
                            {"limits", {{"state_limit", state_limit}, {"time_limit_seconds", time_limit}}}};
      OwnedString json;
      if (int c = report(jobsched_campaign_run(config.dump().c_str(), print_progress, nullptr, &json.text)))
        return c;
      std::cout << json.str() << "\n";
      return 0;
    }

    if (*agg) {
      OwnedString text;
      if (int c = report(jobsched_aggregate(results.c_str(), bucket.c_str(), baseline.c_str(), &text.text)))
        return c;
      emit(text.str(), out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
