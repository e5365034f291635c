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

#ifndef MOEPLAN_SIM_HPP_
#define MOEPLAN_SIM_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "moeplan/oracle.hpp"
#include "moeplan/planner.hpp"
#include "moeplan/trace.hpp"

namespace moeplan {

enum class SchedulerKind {
  laer,              // load-adaptive per-iteration re-layout from history
  static_ep,         // fixed blockwise placement
  even_replication,  // fixed equal replica counts
  oracle_layout,     // clairvoyant exact layout; valid within oracle bounds
};

const char* scheduler_name(SchedulerKind kind);
SchedulerKind scheduler_from_name(const std::string& name);

struct SimRecord {
  std::uint32_t iteration = 0;
  std::uint32_t layer = 0;
  SchedulerKind scheduler = SchedulerKind::laer;
  double t_comm = 0.0;
  double t_comp = 0.0;
  double t_total = 0.0;
  TokenCount max_recv_tokens = 0;
  double ideal_tokens = 0.0;  // record total / n_devices
};

struct SchedulerSummary {
  double mean_iteration_time = 0.0;  // mean over iterations, layers summed
  double mean_balance_ratio = 0.0;   // mean of max_recv / ideal
  // speedup_vs[other] = mean_iteration_time(other) / mean_iteration_time(this)
  std::map<std::string, double> speedup_vs;
};

struct SimReport {
  int n_devices = 0;
  int n_experts = 0;
  std::vector<SchedulerKind> schedulers;  // in requested order
  std::vector<SimRecord> records;         // (iteration, layer, scheduler) order
  std::map<std::string, SchedulerSummary> summary;
};

// Replays the trace under each scheduler. Iteration 0 of every layer runs on
// the scheduler's initial layout; from then on the adaptive scheduler plans
// each layer's layout from that layer's earlier records only, while routing
// always resolves against the active layout via lite_routing. The oracle
// budget is only consulted by the clairvoyant scheduler.
SimReport run_simulation(const std::vector<TraceRecord>& trace,
                         const Topology& topology, const CostParams& params,
                         int capacity, std::span<const SchedulerKind> schedulers,
                         const LayoutSearchSpec& search,
                         const OracleBudget& oracle_budget = {});

struct BalanceMetrics {
  double mean = 0.0;
  double p95 = 0.0;
};

std::map<std::string, BalanceMetrics> balance_metrics(const SimReport& report);

struct SweepRow {
  int n_devices = 0;
  double speedup = 0.0;  // adaptive vs static placement
};

// Regenerates the synthetic trace at every cluster size (same seed, same
// per-device token count) and reports the adaptive scheduler's speedup over
// the static baseline. b_intra/b_inter apply to the first device count; the
// fabric bandwidth scales proportionally for larger clusters so the
// serially-summed communication term keeps a size-independent weight.
std::vector<SweepRow> scalability_sweep(const TraceGenSpec& base_spec,
                                        int devices_per_node, double b_intra,
                                        double b_inter,
                                        const CostParams& params, int capacity,
                                        std::span<const int> device_counts,
                                        const LayoutSearchSpec& search);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace moeplan

#endif  // MOEPLAN_SIM_HPP_
