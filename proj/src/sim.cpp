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

#include "moeplan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <sstream>
#include <utility>

#include "moeplan/error.hpp"
#include "moeplan/serialize.hpp"

namespace moeplan {

const char* scheduler_name(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::laer: return "laer";
    case SchedulerKind::static_ep: return "static_ep";
    case SchedulerKind::even_replication: return "even_replication";
    case SchedulerKind::oracle_layout: return "oracle_layout";
  }
  return "unknown";
}

SchedulerKind scheduler_from_name(const std::string& name) {
  if (name == "laer") return SchedulerKind::laer;
  if (name == "static_ep") return SchedulerKind::static_ep;
  if (name == "even_replication") return SchedulerKind::even_replication;
  if (name == "oracle_layout") return SchedulerKind::oracle_layout;
  throw Error(ErrorKind::invalid_argument, "unknown scheduler: " + name);
}

namespace {

// Per-layer record streams, iteration-ascending.
std::map<std::uint32_t, std::vector<const TraceRecord*>> group_by_layer(
    const std::vector<TraceRecord>& trace) {
  std::map<std::uint32_t, std::vector<const TraceRecord*>> layers;
  for (const TraceRecord& record : trace)
    layers[record.layer].push_back(&record);
  for (auto& [layer, records] : layers)
    std::sort(records.begin(), records.end(),
              [](const TraceRecord* a, const TraceRecord* b) {
                return a->iteration < b->iteration;
              });
  return layers;
}

}  // namespace

SimReport run_simulation(const std::vector<TraceRecord>& trace,
                         const Topology& topology, const CostParams& params,
                         int capacity,
                         std::span<const SchedulerKind> schedulers,
                         const LayoutSearchSpec& search,
                         const OracleBudget& oracle_budget) {
  if (trace.empty())
    throw Error(ErrorKind::invalid_argument, "run_simulation: empty trace");
  if (schedulers.empty())
    throw Error(ErrorKind::invalid_argument,
                "run_simulation: no schedulers requested");
  const int n_devices = trace.front().routing.n_devices();
  const int n_experts = trace.front().routing.n_experts();
  if (topology.n_devices() != n_devices)
    throw Error(ErrorKind::invalid_argument,
                "run_simulation: topology has " +
                    std::to_string(topology.n_devices()) +
                    " devices but the trace has " + std::to_string(n_devices));
  validate_cost_params(params);
  for (SchedulerKind kind : schedulers)
    if (kind == SchedulerKind::oracle_layout &&
        (n_devices > kOracleMaxDevices || n_experts > kOracleMaxExperts ||
         capacity > kOracleMaxCapacity))
      throw Error(ErrorKind::invalid_argument,
                  "run_simulation: the oracle_layout scheduler only runs "
                  "within the exact solver's bounds (n_devices <= 4, "
                  "n_experts <= 4, capacity <= 2)");

  SimReport report;
  report.n_devices = n_devices;
  report.n_experts = n_experts;
  report.schedulers.assign(schedulers.begin(), schedulers.end());

  auto layers = group_by_layer(trace);

  for (SchedulerKind kind : schedulers) {
    ExpertLayout initial =
        kind == SchedulerKind::static_ep
            ? static_ep_layout(n_devices, n_experts, capacity)
            : even_replication_layout(topology, n_experts, capacity);

    for (const auto& [layer, records] : layers) {
      // The adaptive scheduler's perturbation stream depends on the layer
      // only, so a stationary history keeps yielding the same layout.
      LayoutSearchSpec layer_search = search;
      layer_search.seed = mix_seed(search.seed, 0x6c617972, layer);

      std::vector<RoutingMatrix> history;
      history.reserve(records.size());
      ExpertLayout active = initial;
      for (std::size_t p = 0; p < records.size(); ++p) {
        const TraceRecord& record = *records[p];
        if (p > 0) {
          switch (kind) {
            case SchedulerKind::laer:
              active = plan_layout(history, topology, params, capacity,
                                   layer_search);
              break;
            case SchedulerKind::oracle_layout:
              active = solve_exact(record.routing, topology, params, capacity,
                                   oracle_budget)
                           .layout;
              break;
            case SchedulerKind::static_ep:
            case SchedulerKind::even_replication:
              break;  // fixed layout
          }
        }
        RoutingPlan plan = lite_routing(record.routing, active, topology);
        CostBreakdown cb = time_cost(plan, topology, params);

        SimRecord sim_record;
        sim_record.iteration = record.iteration;
        sim_record.layer = layer;
        sim_record.scheduler = kind;
        sim_record.t_comm = cb.t_comm;
        sim_record.t_comp = cb.t_comp;
        sim_record.t_total = cb.t_total;
        sim_record.max_recv_tokens = cb.max_recv_tokens();
        sim_record.ideal_tokens =
            static_cast<double>(record.routing.total()) / n_devices;
        report.records.push_back(sim_record);

        history.push_back(record.routing);
      }
    }
  }

  std::sort(report.records.begin(), report.records.end(),
            [&](const SimRecord& a, const SimRecord& b) {
              auto pos = [&](SchedulerKind k) {
                return std::find(report.schedulers.begin(),
                                 report.schedulers.end(), k) -
                       report.schedulers.begin();
              };
              return std::tuple(a.iteration, a.layer, pos(a.scheduler)) <
                     std::tuple(b.iteration, b.layer, pos(b.scheduler));
            });

  // Aggregates: iteration time sums the layers of one iteration.
  std::set<std::uint32_t> iteration_ids;
  for (const SimRecord& r : report.records) iteration_ids.insert(r.iteration);
  for (SchedulerKind kind : schedulers) {
    SchedulerSummary summary;
    double total_time = 0.0;
    double ratio_sum = 0.0;
    long n_records = 0;
    for (const SimRecord& r : report.records) {
      if (r.scheduler != kind) continue;
      total_time += r.t_total;
      ratio_sum += r.ideal_tokens > 0.0
                       ? static_cast<double>(r.max_recv_tokens) /
                             r.ideal_tokens
                       : 1.0;
      ++n_records;
    }
    summary.mean_iteration_time =
        iteration_ids.empty() ? 0.0
                              : total_time / static_cast<double>(
                                                 iteration_ids.size());
    summary.mean_balance_ratio =
        n_records > 0 ? ratio_sum / static_cast<double>(n_records) : 0.0;
    report.summary[scheduler_name(kind)] = summary;
  }
  for (SchedulerKind kind : schedulers) {
    SchedulerSummary& summary = report.summary[scheduler_name(kind)];
    for (SchedulerKind other : schedulers) {
      double mine = summary.mean_iteration_time;
      double theirs =
          report.summary[scheduler_name(other)].mean_iteration_time;
      summary.speedup_vs[scheduler_name(other)] =
          kind == other ? 1.0 : (mine > 0.0 ? theirs / mine : 1.0);
    }
  }
  return report;
}

std::map<std::string, BalanceMetrics> balance_metrics(
    const SimReport& report) {
  if (report.records.empty())
    throw Error(ErrorKind::invalid_argument, "balance_metrics: empty report");
  std::map<std::string, BalanceMetrics> out;
  for (SchedulerKind kind : report.schedulers) {
    std::vector<double> ratios;
    for (const SimRecord& r : report.records)
      if (r.scheduler == kind)
        ratios.push_back(r.ideal_tokens > 0.0
                             ? static_cast<double>(r.max_recv_tokens) /
                                   r.ideal_tokens
                             : 1.0);
    if (ratios.empty()) continue;
    std::sort(ratios.begin(), ratios.end());
    BalanceMetrics metrics;
    for (double r : ratios) metrics.mean += r;
    metrics.mean /= static_cast<double>(ratios.size());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(ratios.size())));
    metrics.p95 = ratios[std::max<std::size_t>(rank, 1) - 1];
    out[scheduler_name(kind)] = metrics;
  }
  return out;
}

std::vector<SweepRow> scalability_sweep(const TraceGenSpec& base_spec,
                                        int devices_per_node, double b_intra,
                                        double b_inter,
                                        const CostParams& params, int capacity,
                                        std::span<const int> device_counts,
                                        const LayoutSearchSpec& search) {
  if (device_counts.empty())
    throw Error(ErrorKind::invalid_argument,
                "scalability_sweep: no device counts");
  std::vector<SweepRow> rows;
  const SchedulerKind pair[] = {SchedulerKind::laer, SchedulerKind::static_ep};
  const int base_devices = device_counts.front();
  for (int n : device_counts) {
    if (n <= 0 || n % devices_per_node != 0)
      throw Error(ErrorKind::invalid_argument,
                  "scalability_sweep: device count " + std::to_string(n) +
                      " is not a multiple of devices_per_node");
    if (base_spec.n_experts > n * capacity)
      throw Error(ErrorKind::infeasible,
                  "scalability_sweep: " + std::to_string(base_spec.n_experts) +
                      " experts do not fit on " + std::to_string(n) +
                      " devices at capacity " + std::to_string(capacity));
    TraceGenSpec spec = base_spec;
    spec.n_devices = n;
    // The cost model charges transfers serially, so total communication time
    // grows with the device count even though each device sends a fixed
    // volume. Scaling the modeled fabric bandwidth with cluster size keeps
    // the per-device communication-to-computation ratio constant, which is
    // what the sweep compares across sizes.
    double scale = static_cast<double>(n) / base_devices;
    Topology topology(n / devices_per_node, devices_per_node,
                      b_intra * scale, b_inter * scale);
    SimReport report = run_simulation(generate_trace(spec), topology, params,
                                      capacity, pair, search);
    rows.push_back(
        {n, report.summary.at("laer").speedup_vs.at("static_ep")});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "n_devices,speedup\n";
  for (const SweepRow& row : rows)
    out << row.n_devices << ',' << format_double(row.speedup) << '\n';
  return out.str();
}

}  // namespace moeplan
