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

#ifndef MOEPLAN_CONFIG_HPP_
#define MOEPLAN_CONFIG_HPP_

#include <optional>
#include <string>

#include "moeplan/cost.hpp"
#include "moeplan/oracle.hpp"
#include "moeplan/planner.hpp"
#include "moeplan/topology.hpp"
#include "moeplan/trace.hpp"

namespace moeplan {

// One JSON document with topology / cost / model / planner / oracle blocks.
// Blocks may be omitted; commands check for what they need up front.
struct RunConfig {
  std::optional<Topology> topology;
  std::optional<CostParams> cost;

  int n_experts = 0;
  int capacity = 0;
  AnalysisConfig analysis;

  LayoutSearchSpec search;
  bool has_seed = false;

  OracleBudget oracle_budget;

  std::string trace_path;
  std::string out_path;

  const Topology& require_topology() const;
  const CostParams& require_cost() const;
  void require_model() const;
  // Randomized paths refuse to run without an explicit seed.
  void require_seed() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// seed_required: reject specs without a "seed" field (the caller has no
// override to supply one).
TraceGenSpec parse_gen_spec(const std::string& json_text,
                            bool seed_required = true);

// Oracle instance file: {"R": [[u64; E]; N]}.
RoutingMatrix parse_instance(const std::string& json_text);

}  // namespace moeplan

#endif  // MOEPLAN_CONFIG_HPP_
