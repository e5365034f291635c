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

#ifndef MOEPLAN_COMMANDS_HPP_
#define MOEPLAN_COMMANDS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "moeplan/config.hpp"
#include "moeplan/sim.hpp"

namespace moeplan {

// Command-level entry points shared by the C API and the CLI. Every function
// returns deterministic text for a given (config, inputs, seed).

std::vector<std::uint32_t> distinct_layers(
    const std::vector<TraceRecord>& records);

// Planned layouts for one layer: iteration t's layout derives from the
// layer's records before t; the entry one past the trace carries the layout
// for the next, unobserved iteration.
std::string plan_layer_json(const RunConfig& config,
                            const std::vector<TraceRecord>& trace,
                            std::uint32_t layer);

// (report JSON, per-record CSV).
std::pair<std::string, std::string> simulate_artifacts(
    const RunConfig& config, const std::vector<TraceRecord>& trace,
    const std::vector<SchedulerKind>& schedulers);

std::vector<SchedulerKind> parse_scheduler_list(const std::string& csv);

// Communication-volume ratio, memory footprint, and overlap threshold.
std::string analyze_json(const RunConfig& config);

// Greedy-vs-exact comparison on one routing instance.
std::string oracle_gap_json(const RunConfig& config,
                            const RoutingMatrix& instance);

std::string stats_json(const std::vector<TraceRecord>& trace);

}  // namespace moeplan

#endif  // MOEPLAN_COMMANDS_HPP_
