// Copyright 2026 The Moeplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "moeplan/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "moeplan/error.hpp"

namespace moeplan {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, what + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& block, const char* key, const std::string& context) {
  if (!block.contains(key))
    throw Error(ErrorKind::parse, context + ": missing field \"" + key + "\"");
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse,
                context + ": field \"" + key + "\" has the wrong type");
  }
}

template <typename T>
T get_field_or(const json& block, const char* key, const std::string& context,
               T fallback) {
  if (!block.contains(key)) return fallback;
  return get_field<T>(block, key, context);
}

}  // namespace

const Topology& RunConfig::require_topology() const {
  if (!topology)
    throw Error(ErrorKind::invalid_argument,
                "config: a topology block is required for this command");
  return *topology;
}

const CostParams& RunConfig::require_cost() const {
  if (!cost)
    throw Error(ErrorKind::invalid_argument,
                "config: a cost block is required for this command");
  return *cost;
}

void RunConfig::require_model() const {
  if (n_experts <= 0 || capacity <= 0)
    throw Error(ErrorKind::invalid_argument,
                "config: a model block with n_experts and capacity is "
                "required for this command");
}

void RunConfig::require_seed() const {
  if (!has_seed)
    throw Error(ErrorKind::invalid_argument,
                "config: a seed is required for randomized planning; set "
                "planner.seed or pass --seed");
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc = parse_json(json_text, "config");
  if (!doc.is_object())
    throw Error(ErrorKind::parse, "config: document must be a JSON object");
  RunConfig config;

  if (doc.contains("topology")) {
    const json& block = doc["topology"];
    int n_nodes = get_field<int>(block, "n_nodes", "config.topology");
    int devices_per_node =
        get_field<int>(block, "devices_per_node", "config.topology");
    double b_intra = get_field<double>(block, "b_intra", "config.topology");
    double b_inter = get_field<double>(block, "b_inter", "config.topology");
    config.topology.emplace(n_nodes, devices_per_node, b_intra, b_inter);
  }

  if (doc.contains("cost")) {
    const json& block = doc["cost"];
    CostParams params;
    params.v_comm = get_field<double>(block, "v_comm", "config.cost");
    params.v_comp = get_field<double>(block, "v_comp", "config.cost");
    params.b_comp = get_field<double>(block, "b_comp", "config.cost");
    params.f_ckpt = get_field_or<int>(block, "f_ckpt", "config.cost", 0);
    validate_cost_params(params);
    config.cost = params;
  }

  if (doc.contains("model")) {
    const json& block = doc["model"];
    const std::string ctx = "config.model";
    config.n_experts = get_field<int>(block, "n_experts", ctx);
    config.capacity = get_field<int>(block, "capacity", ctx);
    AnalysisConfig& a = config.analysis;
    a.n_experts = config.n_experts;
    a.capacity = config.capacity;
    a.p_fsep = get_field_or<int>(block, "p_fsep", ctx, 0);
    a.p_ep = get_field_or<int>(block, "p_ep", ctx, 0);
    a.p_fsdp = get_field_or<int>(block, "p_fsdp", ctx, 0);
    a.psi_expert = get_field_or<double>(block, "psi_expert", ctx, 0.0);
    a.psi_other = get_field_or<double>(block, "psi_other", ctx, 0.0);
    a.psi_all = get_field_or<double>(block, "psi_all", ctx, 0.0);
    a.hidden = get_field_or<int>(block, "hidden", ctx, 0);
    a.intermediate = get_field_or<int>(block, "intermediate", ctx, 0);
    a.topk = get_field_or<int>(block, "topk", ctx, 0);
    a.tokens_per_device =
        get_field_or<std::uint64_t>(block, "tokens_per_device", ctx, 0);
    a.bytes_per_element =
        get_field_or<int>(block, "bytes_per_element", ctx, 2);
  }

  if (doc.contains("planner")) {
    const json& block = doc["planner"];
    const std::string ctx = "config.planner";
    config.search.epsilon = get_field_or<int>(block, "epsilon", ctx, 2);
    if (config.search.epsilon < 2)
      throw Error(ErrorKind::invalid_argument,
                  "config.planner: epsilon must be at least 2");
    if (block.contains("seed")) {
      config.search.seed = get_field<std::uint64_t>(block, "seed", ctx);
      config.has_seed = true;
    }
    std::string mode =
        get_field_or<std::string>(block, "history", ctx, "last");
    if (mode == "last")
      config.search.history_mode = HistoryMode::last;
    else if (mode == "ema")
      config.search.history_mode = HistoryMode::ema;
    else
      throw Error(ErrorKind::parse,
                  "config.planner: history must be \"last\" or \"ema\"");
    config.search.ema_decay =
        get_field_or<double>(block, "ema_decay", ctx, 0.5);
  }

  if (doc.contains("oracle")) {
    const json& block = doc["oracle"];
    const std::string ctx = "config.oracle";
    config.oracle_budget.max_layout_candidates = get_field_or<std::int64_t>(
        block, "max_layout_candidates", ctx,
        config.oracle_budget.max_layout_candidates);
    config.oracle_budget.max_token_granularity =
        get_field_or<std::uint64_t>(block, "max_token_granularity", ctx, 0);
  }

  if (doc.contains("paths")) {
    const json& block = doc["paths"];
    config.trace_path =
        get_field_or<std::string>(block, "trace", "config.paths", "");
    config.out_path =
        get_field_or<std::string>(block, "out", "config.paths", "");
  }

  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

TraceGenSpec parse_gen_spec(const std::string& json_text,
                            bool seed_required) {
  json doc = parse_json(json_text, "trace spec");
  if (!doc.is_object())
    throw Error(ErrorKind::parse, "trace spec: document must be a JSON object");
  const std::string ctx = "trace spec";
  TraceGenSpec spec;
  spec.n_devices = get_field<int>(doc, "n_devices", ctx);
  spec.n_experts = get_field<int>(doc, "n_experts", ctx);
  spec.n_layers = get_field_or<int>(doc, "n_layers", ctx, 1);
  spec.n_iterations = get_field<int>(doc, "n_iterations", ctx);
  spec.tokens_per_device =
      get_field<std::uint64_t>(doc, "tokens_per_device", ctx);
  spec.skew_alpha = get_field<double>(doc, "skew_alpha", ctx);
  spec.drift_sigma = get_field_or<double>(doc, "drift_sigma", ctx, 0.0);
  if (doc.contains("seed"))
    spec.seed = get_field<std::uint64_t>(doc, "seed", ctx);
  else if (seed_required)
    throw Error(ErrorKind::invalid_argument,
                "trace spec: a seed is required; set \"seed\" or pass --seed");
  return spec;
}

RoutingMatrix parse_instance(const std::string& json_text) {
  json doc = parse_json(json_text, "instance");
  if (!doc.is_object() || !doc.contains("R") || !doc["R"].is_array() ||
      doc["R"].empty())
    throw Error(ErrorKind::parse,
                "instance: expected an object with a non-empty \"R\" matrix");
  const json& rows = doc["R"];
  int n = static_cast<int>(rows.size());
  int e = -1;
  for (const json& row : rows) {
    if (!row.is_array() || row.empty())
      throw Error(ErrorKind::parse, "instance: R rows must be arrays");
    if (e == -1)
      e = static_cast<int>(row.size());
    else if (static_cast<int>(row.size()) != e)
      throw Error(ErrorKind::parse, "instance: ragged R matrix");
  }
  RoutingMatrix routing(n, e);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < e; ++j) {
      const json& cell = rows[i][j];
      if (!cell.is_number_unsigned())
        throw Error(ErrorKind::parse,
                    "instance: counts must be non-negative integers");
      routing.at(i, j) = cell.get<TokenCount>();
    }
  return routing;
}

}  // namespace moeplan
