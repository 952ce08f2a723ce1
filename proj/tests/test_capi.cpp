#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "jobsched/jobsched.h"

namespace {

struct Text {
  char* p = nullptr;
  ~Text() { jobsched_string_free(p); }
  nlohmann::json json() const { return nlohmann::json::parse(p); }
};

const char* kMm1 = R"({"nodes": 1, "edges": [],
  "demand": [{"id": 1, "lambda": 0.2, "mu": 0.5, "cost": 1}], "tau": 0.5})";

}  // namespace

TEST_CASE("instances through the C interface") {
  jobsched_instance* inst = nullptr;
  REQUIRE(jobsched_instance_generate("two-cluster", 5, &inst) == JOBSCHED_OK);
  jobsched_summary s{};
  CHECK(jobsched_instance_summary(inst, &s) == JOBSCHED_OK);
  CHECK(s.demand_count >= 2);
  CHECK(s.node_count == s.demand_count + s.stage_count);
  CHECK(s.rho < 1.0);

  Text json;
  REQUIRE(jobsched_instance_to_json(inst, &json.p) == JOBSCHED_OK);
  jobsched_instance* copy = nullptr;
  REQUIRE(jobsched_instance_from_json(json.p, &copy) == JOBSCHED_OK);
  Text again;
  jobsched_instance_to_json(copy, &again.p);
  CHECK(std::strcmp(json.p, again.p) == 0);

  const char* path = "capi_instance.json";
  CHECK(jobsched_instance_save(inst, path) == JOBSCHED_OK);
  jobsched_instance* loaded = nullptr;
  CHECK(jobsched_instance_load(path, &loaded) == JOBSCHED_OK);
  jobsched_instance_free(loaded);
  std::remove(path);

  jobsched_instance_free(copy);
  jobsched_instance_free(inst);
  jobsched_instance_free(nullptr);
}

TEST_CASE("errors map to status codes") {
  jobsched_instance* inst = nullptr;
  CHECK(jobsched_instance_from_json("{nope", &inst) == JOBSCHED_ERR_PARSE);
  CHECK(std::strlen(jobsched_last_error()) > 0);
  CHECK(inst == nullptr);
  CHECK(jobsched_instance_load("/nonexistent/x.json", &inst) == JOBSCHED_ERR_IO);
  CHECK(jobsched_instance_generate("ring", 1, &inst) == JOBSCHED_ERR_INVALID_ARGUMENT);
  CHECK(jobsched_instance_from_json(nullptr, &inst) == JOBSCHED_ERR_INVALID_ARGUMENT);
  const char* unstable = R"({"nodes": 1, "edges": [],
    "demand": [{"id": 1, "lambda": 0.5, "mu": 0.4, "cost": 1}], "tau": 0.5})";
  CHECK(jobsched_instance_from_json(unstable, &inst) == JOBSCHED_ERR_MODEL);

  REQUIRE(jobsched_instance_from_json(kMm1, &inst) == JOBSCHED_OK);
  CHECK(std::strlen(jobsched_last_error()) == 0);
  Text out;
  CHECK(jobsched_simulate(inst, "kstop:0", 1, 10, 10, &out.p) == JOBSCHED_ERR_PARSE);
  CHECK(out.p == nullptr);
  CHECK(jobsched_aggregate("/nonexistent.csv", "none", "dp", &out.p) == JOBSCHED_ERR_IO);
  jobsched_instance_free(inst);
}

TEST_CASE("simulation and DP") {
  jobsched_instance* inst = nullptr;
  REQUIRE(jobsched_instance_from_json(kMm1, &inst) == JOBSCHED_OK);
  Text sim;
  REQUIRE(jobsched_simulate(inst, "kstop:1", 3, 10'000, 400'000, &sim.p) == JOBSCHED_OK);
  const auto r = sim.json();
  CHECK(std::abs(r.at("average_cost").get<double>() - 2.0 / 3.0) < 4 * r.at("std_error").get<double>());
  CHECK(r.at("policy") == "kstop:1");

  Text dvo;
  REQUIRE(jobsched_simulate(inst, "dvo", 3, 1000, 200'000, &dvo.p) == JOBSCHED_OK);
  CHECK(dvo.json().at("average_cost").get<double>() > 0.0);

  Text dp;
  REQUIRE(jobsched_dp_solve(inst, 200, 1e-7, 1'000'000, &dp.p) == JOBSCHED_OK);
  CHECK(dp.json().at("g_star").get<double>() == doctest::Approx(2.0 / 3.0).epsilon(0.01));

  Text capped;
  CHECK(jobsched_dp_solve(inst, 50, 1e-12, 2, &capped.p) == JOBSCHED_ERR_NOT_CONVERGED);
  REQUIRE(capped.p != nullptr);
  CHECK(capped.json().at("converged") == false);

  Text feas;
  REQUIRE(jobsched_dp_feasibility(inst, R"({"state_limit": 45})", &feas.p) == JOBSCHED_OK);
  CHECK(feas.json().at("feasible") == true);
  Text bad;
  CHECK(jobsched_dp_feasibility(inst, "[1]", &bad.p) == JOBSCHED_ERR_PARSE);
  jobsched_instance_free(inst);
}

TEST_CASE("campaign and aggregate") {
  const char* out = "capi_campaign.csv";
  std::remove(out);
  const std::string config = std::string(R"({"layout": "two-cluster", "max_demand": 3, "instances": 3,
    "seed": 9, "policies": ["dvo", "kstop:1", "kstop:2"], "warmup": 200, "horizon": 4000,
    "output": ")") + out + "\"}";
  int calls = 0;
  auto progress = [](uint64_t, uint64_t, void* user) { ++*static_cast<int*>(user); };
  Text summary;
  REQUIRE(jobsched_campaign_run(config.c_str(), progress, &calls, &summary.p) == JOBSCHED_OK);
  CHECK(calls == 3);
  CHECK(summary.json().at("rows") == 3);
  CHECK(summary.json().at("failed") == 0);

  Text agg;
  REQUIRE(jobsched_aggregate(out, "none", "dvo", &agg.p) == JOBSCHED_OK);
  const std::string text = agg.p;
  CHECK(text.rfind("comparison,bucket,count", 0) == 0);
  CHECK(text.find("kstop:1 vs dvo,all,3,") != std::string::npos);
  CHECK(text.find("kstop:2 vs dvo,all,3,") != std::string::npos);
  Text bad;
  CHECK(jobsched_aggregate(out, "size", "dvo", &bad.p) == JOBSCHED_ERR_INVALID_ARGUMENT);
  std::remove(out);
}
