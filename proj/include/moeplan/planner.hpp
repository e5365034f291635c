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

#ifndef MOEPLAN_PLANNER_HPP_
#define MOEPLAN_PLANNER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "moeplan/cost.hpp"
#include "moeplan/rng.hpp"
#include "moeplan/topology.hpp"
#include "moeplan/types.hpp"

namespace moeplan {

// Replica counts proportional to load: starting from one replica each,
// repeatedly grant a replica to the expert with the highest load per
// replica, skipping experts already replicated on every device, until
// n_devices * capacity replicas exist. Ties go to the lowest expert index.
ReplicaVector replica_allocation(std::span<const double> expert_loads,
                                 int n_devices, int n_experts, int capacity);

// Places replicas in descending per-replica load order. Each replica goes to
// a node holding the fewest copies of its expert among nodes that can still
// accept one, then to the least-loaded device there (lowest index on ties).
// If no node can accept the replica, a deterministic swap with an earlier
// placement frees a slot.
ExpertLayout expert_relocation(const ReplicaVector& replicas,
                               std::span<const double> expert_loads,
                               const Topology& topology, int capacity);

// Moves one replica from a random expert with more than one copy to a random
// other expert not yet on every device. Identity when no donor or no
// recipient exists.
ReplicaVector perturb_replicas(const ReplicaVector& replicas, int n_devices,
                               Rng& rng);

// Splits each (source, expert) token count evenly across the expert's
// replicas inside the source's node, falling back to all replicas when the
// node holds none. Remainder tokens go one each to the lowest destination
// indices.
RoutingPlan lite_routing(const RoutingMatrix& routing,
                         const ExpertLayout& layout,
                         const Topology& topology);

// Fixed blockwise placement: device slots in device-major order take experts
// round-robin, so device i hosts experts {i*C .. i*C+C-1} mod E.
ExpertLayout static_ep_layout(int n_devices, int n_experts, int capacity);

// Equal replica counts (remainder to the lowest-index experts), placed by
// expert_relocation under uniform loads.
ExpertLayout even_replication_layout(const Topology& topology, int n_experts,
                                     int capacity);

enum class HistoryMode { last, ema };

struct LayoutSearchSpec {
  int epsilon = 2;  // candidate replica schemes; >= 2
  std::uint64_t seed = 0;
  HistoryMode history_mode = HistoryMode::last;
  double ema_decay = 0.5;  // weight of the newest observation in ema mode
};

// Load-aggregated view of a routing history (most recent record last).
struct AggregatedRouting {
  int n_devices = 0;
  int n_experts = 0;
  std::vector<double> weights;  // row-major N x E

  double at(int device, int expert) const {
    return weights[static_cast<std::size_t>(device) * n_experts + expert];
  }
  std::vector<double> expert_loads() const;
  // Nearest-integer image used to score candidate layouts.
  RoutingMatrix rounded() const;
};

AggregatedRouting aggregate_history(std::span<const RoutingMatrix> history,
                                    HistoryMode mode, double ema_decay);

// Full layout search: scores the proportional scheme, the even scheme, and
// seeded random perturbations of set members, each placed by
// expert_relocation and evaluated with lite_routing + time_cost on the
// aggregated history. Returns the cheapest layout; earlier candidates win
// ties.
ExpertLayout plan_layout(std::span<const RoutingMatrix> history,
                         const Topology& topology, const CostParams& params,
                         int capacity, const LayoutSearchSpec& spec);

}  // namespace moeplan

#endif  // MOEPLAN_PLANNER_HPP_
