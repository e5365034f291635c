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

#include "moeplan/commands.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "moeplan/error.hpp"
#include "moeplan/serialize.hpp"

namespace moeplan {

std::vector<std::uint32_t> distinct_layers(
    const std::vector<TraceRecord>& records) {
  std::set<std::uint32_t> layers;
  for (const TraceRecord& record : records) layers.insert(record.layer);
  return {layers.begin(), layers.end()};
}

std::string plan_layer_json(const RunConfig& config,
                            const std::vector<TraceRecord>& trace,
                            std::uint32_t layer) {
  const Topology& topology = config.require_topology();
  const CostParams& params = config.require_cost();
  config.require_model();
  config.require_seed();

  std::vector<const TraceRecord*> records;
  for (const TraceRecord& record : trace)
    if (record.layer == layer) records.push_back(&record);
  if (records.empty())
    throw Error(ErrorKind::invalid_argument,
                "plan: trace has no records for layer " +
                    std::to_string(layer));
  std::sort(records.begin(), records.end(),
            [](const TraceRecord* a, const TraceRecord* b) {
              return a->iteration < b->iteration;
            });
  if (records.front()->routing.n_experts() != config.n_experts)
    throw Error(ErrorKind::invalid_argument,
                "plan: config n_experts disagrees with the trace");

  LayoutSearchSpec search = config.search;
  search.seed = mix_seed(config.search.seed, 0x6c617972, layer);

  std::ostringstream out;
  out << "{\n\"layer\":" << layer << ",\n\"n_devices\":"
      << records.front()->routing.n_devices()
      << ",\n\"n_experts\":" << config.n_experts
      << ",\n\"capacity\":" << config.capacity
      << ",\n\"note\":\"iteration " << records.front()->iteration
      << " runs on the scheduler's initial layout; planned layouts start at "
         "the next observed iteration\",\n\"iterations\":[";

  std::vector<RoutingMatrix> history;
  for (std::size_t p = 1; p <= records.size(); ++p) {
    history.push_back(records[p - 1]->routing);
    ExpertLayout layout =
        plan_layout(history, topology, params, config.capacity, search);

    std::uint32_t iteration = p < records.size()
                                  ? records[p]->iteration
                                  : records.back()->iteration + 1;
    if (p > 1) out << ',';
    out << "\n{\"iteration\":" << iteration << ",\"planned_from_iterations\":[";
    if (config.search.history_mode == HistoryMode::last) {
      out << records[p - 1]->iteration;
    } else {
      for (std::size_t h = 0; h < p; ++h) {
        if (h > 0) out << ',';
        out << records[h]->iteration;
      }
    }
    out << "],\"layout\":" << layout_to_json(layout, config.capacity)
        << ",\"routing_plan\":";
    if (p < records.size()) {
      RoutingPlan plan =
          lite_routing(records[p]->routing, layout, topology);
      out << plan_to_json(plan, records[p]->routing, layout) << ",\"t_total\":"
          << format_double(time_cost(plan, topology, params).t_total);
    } else {
      out << "null";
    }
    out << '}';
  }
  out << "\n]\n}\n";
  return out.str();
}

std::vector<SchedulerKind> parse_scheduler_list(const std::string& csv) {
  std::vector<SchedulerKind> kinds;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    SchedulerKind kind = scheduler_from_name(token);
    if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end())
      throw Error(ErrorKind::invalid_argument,
                  "duplicate scheduler: " + token);
    kinds.push_back(kind);
  }
  if (kinds.empty())
    throw Error(ErrorKind::invalid_argument, "empty scheduler list");
  return kinds;
}

std::pair<std::string, std::string> simulate_artifacts(
    const RunConfig& config, const std::vector<TraceRecord>& trace,
    const std::vector<SchedulerKind>& schedulers) {
  const Topology& topology = config.require_topology();
  const CostParams& params = config.require_cost();
  config.require_model();
  config.require_seed();
  if (!trace.empty() && trace.front().routing.n_experts() != config.n_experts)
    throw Error(ErrorKind::invalid_argument,
                "simulate: config n_experts disagrees with the trace");

  SimReport report =
      run_simulation(trace, topology, params, config.capacity, schedulers,
                     config.search, config.oracle_budget);
  return {report_to_json(report), report_to_csv(report)};
}

std::string analyze_json(const RunConfig& config) {
  const AnalysisConfig& a = config.analysis;
  if (a.p_fsep <= 0 || a.p_ep <= 0 || a.p_fsdp <= 0)
    throw Error(ErrorKind::invalid_argument,
                "analyze: model block must set p_fsep, p_ep and p_fsdp");
  config.require_model();

  std::ostringstream out;
  out << "{\n\"comm_volume\":";
  if (a.p_fsdp == 1) {
    out << "{\"error\":\"ratio undefined for p_fsdp = 1 (the baseline "
           "performs no parameter gathering)\"}";
  } else {
    CommVolumes volumes = comm_volume_ratio(a);
    out << "{\"v_fsep\":" << format_double(volumes.v_fsep)
        << ",\"v_fsdp\":" << format_double(volumes.v_fsdp)
        << ",\"ratio\":" << format_double(volumes.ratio) << '}';
  }

  MemoryFootprint memory = memory_footprint(a);
  out << ",\n\"memory\":{\"optimizer_fraction\":"
      << format_double(memory.optimizer_fraction) << ",\"parameter_bytes\":"
      << format_double(memory.parameter_bytes) << ",\"gradient_bytes\":"
      << format_double(memory.gradient_bytes) << '}';

  if (a.topk > 0) {
    const Topology& topology = config.require_topology();
    const CostParams& params = config.require_cost();
    std::uint64_t min_tokens =
        overlap_min_tokens(a, topology.b_inter(), params.b_comp);
    out << ",\n\"overlap\":{\"net_bandwidth\":"
        << format_double(topology.b_inter())
        << ",\"b_comp\":" << format_double(params.b_comp)
        << ",\"min_tokens_per_device\":" << min_tokens << '}';
  }
  out << "\n}\n";
  return out.str();
}

std::string oracle_gap_json(const RunConfig& config,
                            const RoutingMatrix& instance) {
  const Topology& topology = config.require_topology();
  const CostParams& params = config.require_cost();
  config.require_model();
  if (instance.n_experts() != config.n_experts)
    throw Error(ErrorKind::invalid_argument,
                "oracle: config n_experts disagrees with the instance");

  ExactSolution exact = solve_exact(instance, topology, params,
                                    config.capacity, config.oracle_budget);

  std::vector<RoutingMatrix> history{instance};
  ExpertLayout greedy_layout = plan_layout(history, topology, params,
                                           config.capacity, config.search);
  RoutingPlan greedy_plan = lite_routing(instance, greedy_layout, topology);
  double greedy_cost = time_cost(greedy_plan, topology, params).t_total;

  double exact_cost = exact.cost.t_total;
  double gap = exact_cost > 0.0 ? greedy_cost / exact_cost : 1.0;

  std::ostringstream out;
  out << "{\n\"instance\":{\"n_devices\":" << instance.n_devices()
      << ",\"n_experts\":" << instance.n_experts()
      << ",\"capacity\":" << config.capacity
      << ",\"total_tokens\":" << instance.total()
      << "},\n\"greedy_cost\":" << format_double(greedy_cost)
      << ",\n\"exact_cost\":" << format_double(exact_cost)
      << ",\n\"gap\":" << format_double(gap)
      << ",\n\"granularity\":" << exact.granularity
      << ",\n\"layouts_examined\":" << exact.layouts_examined
      << ",\n\"budget_exceeded\":"
      << (exact.budget_exceeded ? "true" : "false") << "\n}\n";
  return out.str();
}

std::string stats_json(const std::vector<TraceRecord>& trace) {
  std::vector<TraceStats> all = trace_stats(trace);
  std::ostringstream out;
  out << "[";
  for (std::size_t k = 0; k < all.size(); ++k) {
    const TraceStats& s = all[k];
    if (k > 0) out << ',';
    out << "\n{\"iter\":" << s.iteration << ",\"layer\":" << s.layer
        << ",\"total_tokens\":" << s.total_tokens << ",\"expert_load\":[";
    for (std::size_t j = 0; j < s.expert_load.size(); ++j) {
      if (j > 0) out << ',';
      out << s.expert_load[j];
    }
    out << "],\"max_share\":" << format_double(s.max_share)
        << ",\"min_share\":" << format_double(s.min_share)
        << ",\"zero_total\":" << (s.zero_total ? "true" : "false") << '}';
  }
  out << "\n]\n";
  return out.str();
}

}  // namespace moeplan
