#pragma once

#include <string>

#include "jobsched/dp.hpp"
#include "jobsched/instgen.hpp"
#include "jobsched/sim.hpp"

namespace jobsched {

// Instance JSON uses 1-based node ids:
//   {"nodes": N, "edges": [[i, j], ...],
//    "demand": [{"id", "lambda", "mu", "cost"}, ...], "tau": t,
//    "delta": x (optional, default 1), "clusters": [[ids], ...] (optional),
//    "meta": {...} (optional generation metadata)}
// Demand ids must be exactly 1..d; nodes above d are stages.
std::string instance_to_json(const InstanceSpec& spec, int indent = 2);
InstanceSpec instance_from_json(const std::string& text);

InstanceSpec load_instance(const std::string& path);
void save_instance(const std::string& path, const InstanceSpec& spec);

std::string report_to_json(const SimReport& report, int indent = 2);
std::string dp_result_to_json(const DpResult& result, double tolerance, int indent = 2);
std::string feasibility_to_json(const FeasibilityResult& result, int indent = 2);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace jobsched
