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

#ifndef MOEPLAN_ORACLE_HPP_
#define MOEPLAN_ORACLE_HPP_

#include <cstdint>
#include <span>

#include "moeplan/cost.hpp"
#include "moeplan/topology.hpp"
#include "moeplan/types.hpp"

namespace moeplan {

struct OracleBudget {
  std::int64_t max_layout_candidates = 100000;
  // Tokens are routed in multiples of this granularity. 0 selects the gcd of
  // the nonzero routing counts; an explicit value must divide every count.
  std::uint64_t max_token_granularity = 0;
};

// Enumeration bounds for solve_exact.
inline constexpr int kOracleMaxDevices = 4;
inline constexpr int kOracleMaxExperts = 4;
inline constexpr int kOracleMaxCapacity = 2;
// Per-cell routing units after granularity coarsening.
inline constexpr std::uint64_t kOracleMaxUnitsPerCell = 20;

struct AllocationResult {
  ReplicaVector replicas;
  double objective = 0.0;  // max over experts of load / replicas
};

// Exhaustive minimizer of max_j(load_j / rep_j) over replica vectors with
// entries in [1, n_devices] summing to n_devices * capacity. Bounded to
// n_devices * capacity <= 12 and n_experts <= 6.
AllocationResult exact_allocation(std::span<const double> expert_loads,
                                  int n_devices, int n_experts, int capacity);

struct ExactSolution {
  ExpertLayout layout;
  RoutingPlan plan;
  CostBreakdown cost;
  std::uint64_t granularity = 1;
  std::int64_t layouts_examined = 0;
  bool budget_exceeded = false;
};

// Global minimizer of the layout + routing objective on one routing matrix.
// Every feasible layout is enumerated; for each, the optimal granular
// routing is found exactly by sweeping the max-received-tokens value and
// solving a min-cost flow per candidate. When the layout budget runs out the
// best solution so far is returned with budget_exceeded set.
ExactSolution solve_exact(const RoutingMatrix& routing,
                          const Topology& topology, const CostParams& params,
                          int capacity, const OracleBudget& budget);

}  // namespace moeplan

#endif  // MOEPLAN_ORACLE_HPP_
