#include "jobsched/jobsched.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "jobsched/campaign.hpp"
#include "jobsched/dp.hpp"
#include "jobsched/error.hpp"
#include "jobsched/heuristics.hpp"
#include "jobsched/io.hpp"
#include "jobsched/sim.hpp"

struct jobsched_instance {
  jobsched::InstanceSpec spec;
  jobsched::Network net;

  explicit jobsched_instance(jobsched::InstanceSpec s) : spec(std::move(s)), net(spec.network()) {}
};

namespace {

thread_local std::string last_error;

jobsched_status status_of(jobsched::ErrorCode code) {
  switch (code) {
    case jobsched::ErrorCode::InvalidArgument:
      return JOBSCHED_ERR_INVALID_ARGUMENT;
    case jobsched::ErrorCode::Parse:
      return JOBSCHED_ERR_PARSE;
    case jobsched::ErrorCode::Io:
      return JOBSCHED_ERR_IO;
    case jobsched::ErrorCode::Model:
      return JOBSCHED_ERR_MODEL;
    case jobsched::ErrorCode::NotConverged:
      return JOBSCHED_ERR_NOT_CONVERGED;
  }
  return JOBSCHED_ERR_INTERNAL;
}

// Runs body, translating exceptions into a status and the thread's message.
template <typename Body>
jobsched_status guarded(Body&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const jobsched::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return JOBSCHED_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return JOBSCHED_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return JOBSCHED_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return JOBSCHED_ERR_INTERNAL;
  }
}

char* copy_out(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (p == nullptr) jobsched::fail(jobsched::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

jobsched::FeasibilityLimits limits_from(const nlohmann::json& j) {
  jobsched::FeasibilityLimits l;
  if (j.is_null()) return l;
  if (!j.is_object()) jobsched::fail(jobsched::ErrorCode::Parse, "limits must be a JSON object");
  l.state_limit = j.value("state_limit", l.state_limit);
  l.time_limit_seconds = j.value("time_limit_seconds", l.time_limit_seconds);
  l.epsilon = j.value("epsilon", l.epsilon);
  l.tolerance = j.value("tolerance", l.tolerance);
  l.max_iters = j.value("max_iters", l.max_iters);
  l.start_m = j.value("start_m", l.start_m);
  l.step_m = j.value("step_m", l.step_m);
  l.max_demand = j.value("max_demand", l.max_demand);
  return l;
}

}  // namespace

extern "C" {

const char* jobsched_version(void) { return "1.0.0"; }

const char* jobsched_last_error(void) { return last_error.c_str(); }

void jobsched_string_free(char* text) { std::free(text); }

jobsched_status jobsched_instance_from_json(const char* json, jobsched_instance** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new jobsched_instance(jobsched::instance_from_json(json));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_instance_load(const char* path, jobsched_instance** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new jobsched_instance(jobsched::load_instance(path));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_instance_generate(const char* layout, uint64_t seed, jobsched_instance** out) {
  return guarded([&] {
    need(layout, "layout");
    need(out, "out");
    *out = new jobsched_instance(jobsched::generate_instance(layout, seed));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_instance_to_json(const jobsched_instance* inst, char** out_json) {
  return guarded([&] {
    need(inst, "instance");
    need(out_json, "out_json");
    *out_json = copy_out(jobsched::instance_to_json(inst->spec));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_instance_save(const jobsched_instance* inst, const char* path) {
  return guarded([&] {
    need(inst, "instance");
    need(path, "path");
    jobsched::save_instance(path, inst->spec);
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_instance_summary(const jobsched_instance* inst, jobsched_summary* out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    const auto& net = inst->net;
    *out = {net.node_count(), net.demand_count(), net.stage_count(), net.rho(),
            net.eta(),        net.total_arrival_rate(), net.tau()};
    return JOBSCHED_OK;
  });
}

void jobsched_instance_free(jobsched_instance* inst) { delete inst; }

jobsched_status jobsched_simulate(const jobsched_instance* inst, const char* policy, uint64_t seed,
                                  uint64_t warmup, uint64_t horizon, char** out_report_json) {
  return guarded([&] {
    need(inst, "instance");
    need(policy, "policy");
    need(out_report_json, "out_report_json");
    const jobsched::PolicySpec spec = jobsched::parse_policy(policy);
    jobsched::SimReport report;
    if (spec.kind == jobsched::PolicySpec::Kind::Dvo) {
      report = jobsched::simulate_dvo(inst->net, seed, static_cast<double>(warmup),
                                      static_cast<double>(horizon));
    } else {
      auto runner = jobsched::make_policy(inst->net, spec);
      report = jobsched::simulate_discrete(inst->net, *runner, seed, warmup, horizon);
    }
    *out_report_json = copy_out(jobsched::report_to_json(report));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_dp_solve(const jobsched_instance* inst, int m, double tol,
                                  int64_t max_iters, char** out_json) {
  return guarded([&] {
    need(inst, "instance");
    need(out_json, "out_json");
    const jobsched::TruncatedMdp mdp(inst->net, m);
    const auto result = jobsched::relative_value_iteration(mdp, tol, static_cast<long>(max_iters));
    *out_json = copy_out(jobsched::dp_result_to_json(result, tol));
    if (!result.converged) {
      last_error = "value iteration stopped at the iteration cap";
      return JOBSCHED_ERR_NOT_CONVERGED;
    }
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_dp_feasibility(const jobsched_instance* inst, const char* limits_json,
                                        char** out_json) {
  return guarded([&] {
    need(inst, "instance");
    need(out_json, "out_json");
    nlohmann::json limits;
    if (limits_json != nullptr) limits = nlohmann::json::parse(limits_json);
    const auto result = jobsched::feasibility_escalation(inst->net, limits_from(limits));
    *out_json = copy_out(jobsched::feasibility_to_json(result));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_campaign_run(const char* config_json, jobsched_progress_fn progress,
                                      void* user, char** out_summary_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_summary_json, "out_summary_json");
    const auto j = nlohmann::json::parse(config_json);
    jobsched::CampaignConfig config;
    config.layout = j.value("layout", config.layout);
    config.max_demand = j.value("max_demand", config.max_demand);
    config.instances = j.value("instances", config.instances);
    config.seed = j.value("seed", config.seed);
    config.policies = j.value("policies", config.policies);
    config.warmup = j.value("warmup", config.warmup);
    config.horizon = j.value("horizon", config.horizon);
    config.solve_dp = j.value("solve_dp", config.solve_dp);
    config.workers = j.value("workers", config.workers);
    config.output = j.value("output", config.output);
    if (j.contains("limits")) config.limits = limits_from(j.at("limits"));
    if (progress != nullptr) {
      config.progress = [progress, user](std::uint64_t done, std::uint64_t total) {
        progress(done, total, user);
      };
    }
    const auto table = jobsched::run_campaign(config);
    std::size_t failed = 0, feasible = 0;
    for (const auto& r : table.rows) {
      if (r.status != "ok") ++failed;
      if (r.feasible.value_or(false)) ++feasible;
    }
    nlohmann::json summary{{"rows", table.rows.size()},
                           {"failed", failed},
                           {"feasible", feasible},
                           {"output", config.output}};
    *out_summary_json = copy_out(summary.dump(2));
    return JOBSCHED_OK;
  });
}

jobsched_status jobsched_aggregate(const char* results_path, const char* bucket,
                                   const char* baseline, char** out_csv) {
  return guarded([&] {
    need(results_path, "results_path");
    need(bucket, "bucket");
    need(baseline, "baseline");
    need(out_csv, "out_csv");
    const auto table = jobsched::read_results(results_path);
    const auto rows = jobsched::aggregate(table, jobsched::parse_bucket(bucket), baseline);
    *out_csv = copy_out(jobsched::aggregate_to_csv(rows));
    return JOBSCHED_OK;
  });
}

}  // extern "C"
