#include "jobsched/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jobsched/error.hpp"

namespace jobsched {

using nlohmann::json;

namespace {

json::array_t as_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    fail(ErrorCode::Parse, std::string("instance field '") + key + "' must be an array");
  }
  return j.at(key).get<json::array_t>();
}

LayoutTag::Kind layout_kind(const std::string& name) {
  if (name == "two-cluster") return LayoutTag::Kind::TwoCluster;
  if (name == "lattice") return LayoutTag::Kind::Lattice;
  return LayoutTag::Kind::Custom;
}

}  // namespace

std::string instance_to_json(const InstanceSpec& spec, int indent) {
  json j;
  j["nodes"] = spec.topology.node_count;
  json edges = json::array();
  for (const auto& [a, b] : spec.topology.edges) edges.push_back({a + 1, b + 1});
  j["edges"] = edges;
  json demand = json::array();
  for (std::size_t i = 0; i < spec.rates.size(); ++i) {
    const auto& r = spec.rates[i];
    demand.push_back({{"id", i + 1}, {"lambda", r.lambda}, {"mu", r.mu}, {"cost", r.cost}});
  }
  j["demand"] = demand;
  j["tau"] = spec.tau;
  j["delta"] = spec.delta;
  if (!spec.topology.clusters.empty()) {
    json clusters = json::array();
    for (const auto& c : spec.topology.clusters) {
      json ids = json::array();
      for (NodeId v : c) ids.push_back(v + 1);
      clusters.push_back(ids);
    }
    j["clusters"] = clusters;
  }
  json meta;
  meta["layout"] = spec.layout.name();
  if (spec.layout.kind == LayoutTag::Kind::TwoCluster) {
    meta["d1"] = spec.layout.d1;
    meta["d2"] = spec.layout.d2;
  }
  meta["n"] = spec.layout.n;
  meta["target_rho"] = spec.target_rho;
  meta["target_eta"] = spec.target_eta;
  meta["seed"] = spec.seed;
  meta["generator"] = spec.generator;
  meta["rejected"] = spec.rejected;
  j["meta"] = meta;
  return j.dump(indent);
}

InstanceSpec instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
  }
  try {
    InstanceSpec spec;
    const int nodes = j.at("nodes").get<int>();
    if (nodes < 1) fail(ErrorCode::Parse, "instance needs at least one node");
    spec.topology.node_count = nodes;
    for (const auto& e : as_array(j, "edges")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorCode::Parse, "each edge must be a pair");
      const int a = e[0].get<int>(), b = e[1].get<int>();
      if (a < 1 || a > nodes || b < 1 || b > nodes) fail(ErrorCode::Parse, "edge endpoint out of range");
      spec.topology.edges.emplace_back(a - 1, b - 1);
    }
    const auto demand = as_array(j, "demand");
    const int d = static_cast<int>(demand.size());
    if (d < 1 || d > nodes) fail(ErrorCode::Parse, "demand list size must be in 1..nodes");
    spec.rates.assign(d, {});
    std::set<int> seen;
    for (const auto& item : demand) {
      const int id = item.at("id").get<int>();
      if (id < 1 || id > d || !seen.insert(id).second) {
        fail(ErrorCode::Parse, "demand ids must be exactly 1..d");
      }
      spec.rates[id - 1] = {item.at("lambda").get<double>(), item.at("mu").get<double>(),
                            item.at("cost").get<double>()};
    }
    spec.topology.demand_count = d;
    spec.tau = j.at("tau").get<double>();
    spec.delta = j.value("delta", 1.0);
    if (!(spec.delta > 0.0)) fail(ErrorCode::Parse, "delta must be positive");
    if (j.contains("clusters")) {
      for (const auto& c : as_array(j, "clusters")) {
        std::vector<NodeId> members;
        for (const auto& id : c) {
          const int v = id.get<int>();
          if (v < 1 || v > d) fail(ErrorCode::Parse, "cluster member must be a demand id");
          members.push_back(v - 1);
        }
        spec.topology.clusters.push_back(members);
      }
    }
    if (j.contains("meta")) {
      const json& meta = j.at("meta");
      spec.layout.kind = layout_kind(meta.value("layout", std::string("custom")));
      spec.layout.d1 = meta.value("d1", 0);
      spec.layout.d2 = meta.value("d2", 0);
      spec.layout.n = meta.value("n", nodes - d);
      spec.target_rho = meta.value("target_rho", 0.0);
      spec.target_eta = meta.value("target_eta", 0.0);
      spec.seed = meta.value("seed", std::uint64_t{0});
      spec.generator = meta.value("generator", std::string());
      spec.rejected = meta.value("rejected", 0);
    } else {
      spec.layout.n = nodes - d;
    }
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed instance: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

InstanceSpec load_instance(const std::string& path) { return instance_from_json(read_text_file(path)); }

void save_instance(const std::string& path, const InstanceSpec& spec) {
  write_text_file(path, instance_to_json(spec) + "\n");
}

std::string report_to_json(const SimReport& r, int indent) {
  json j{{"policy", r.policy},
         {"seed", r.seed},
         {"warmup", r.warmup},
         {"horizon", r.horizon},
         {"average_cost", r.average_cost},
         {"std_error", r.std_error},
         {"half_width", r.half_width},
         {"batches", r.batches},
         {"mean_queue", r.mean_queue},
         {"arrivals", r.arrivals},
         {"services", r.services},
         {"switches", r.switches}};
  if (!r.window_means.empty()) j["window_means"] = r.window_means;
  return j.dump(indent);
}

std::string dp_result_to_json(const DpResult& r, double tolerance, int indent) {
  json j{{"g_star", r.g_star},       {"iterations", r.iterations}, {"span", r.span},
         {"converged", r.converged}, {"m", r.truncation},          {"tolerance", tolerance}};
  return j.dump(indent);
}

std::string feasibility_to_json(const FeasibilityResult& r, int indent) {
  json steps = json::array();
  for (const auto& s : r.history) {
    steps.push_back({{"m", s.m},
                     {"g_star", s.g_star},
                     {"seconds", s.seconds},
                     {"iterations", s.iterations},
                     {"converged", s.converged}});
  }
  json j{{"feasible", r.feasible}, {"g_star", r.g_star}, {"reason", r.reason}, {"history", steps}};
  return j.dump(indent);
}

}  // namespace jobsched
