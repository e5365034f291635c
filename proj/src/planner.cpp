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

#include "moeplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "moeplan/error.hpp"

namespace moeplan {

namespace {

void check_shape(int n_devices, int n_experts, int capacity) {
  if (n_devices <= 0 || n_experts <= 0 || capacity <= 0)
    throw Error(ErrorKind::invalid_argument,
                "planner: dimensions must be positive");
  if (n_experts > n_devices * capacity)
    throw Error(ErrorKind::infeasible,
                "planner: " + std::to_string(n_experts) +
                    " experts exceed " + std::to_string(n_devices * capacity) +
                    " device slots");
  if (capacity > n_experts)
    throw Error(ErrorKind::infeasible,
                "planner: capacity " + std::to_string(capacity) +
                    " exceeds the expert count; devices cannot host " +
                    std::to_string(capacity) + " distinct experts");
}

// a/b > c/d for positive integer denominators, without division.
bool ratio_greater(double a, int b, double c, int d) {
  return a * d > c * b;
}

}  // namespace

ReplicaVector replica_allocation(std::span<const double> expert_loads,
                                 int n_devices, int n_experts, int capacity) {
  check_shape(n_devices, n_experts, capacity);
  if (static_cast<int>(expert_loads.size()) != n_experts)
    throw Error(ErrorKind::invalid_argument,
                "replica_allocation: loads size disagrees with n_experts");
  for (double load : expert_loads)
    if (!(load >= 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "replica_allocation: loads must be non-negative");

  ReplicaVector replicas(n_experts, 1);

  struct QueueEntry {
    double load;
    int replicas;
    int expert;
  };
  auto lower_priority = [](const QueueEntry& a, const QueueEntry& b) {
    if (ratio_greater(a.load, a.replicas, b.load, b.replicas)) return false;
    if (ratio_greater(b.load, b.replicas, a.load, a.replicas)) return true;
    return a.expert > b.expert;
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      decltype(lower_priority)>
      queue(lower_priority);
  for (int j = 0; j < n_experts; ++j)
    queue.push({expert_loads[j], 1, j});

  long long remaining =
      static_cast<long long>(n_devices) * capacity - n_experts;
  while (remaining > 0) {
    QueueEntry top = queue.top();
    queue.pop();
    if (top.replicas != replicas[top.expert]) continue;  // stale entry
    ++replicas[top.expert];
    --remaining;
    if (replicas[top.expert] < n_devices)
      queue.push({top.load, replicas[top.expert], top.expert});
  }

  validate_replicas(replicas, n_devices, capacity);
  return replicas;
}

ExpertLayout expert_relocation(const ReplicaVector& replicas,
                               std::span<const double> expert_loads,
                               const Topology& topology, int capacity) {
  const int n_devices = topology.n_devices();
  const int n_experts = static_cast<int>(replicas.size());
  check_shape(n_devices, n_experts, capacity);
  validate_replicas(replicas, n_devices, capacity);
  if (static_cast<int>(expert_loads.size()) != n_experts)
    throw Error(ErrorKind::invalid_argument,
                "expert_relocation: loads size disagrees with replicas");

  struct Replica {
    int expert;
    double load;     // expert load split across its replicas
    int denominator; // replica count, kept for exact load comparisons
  };
  std::vector<Replica> order;
  order.reserve(static_cast<std::size_t>(n_devices) * capacity);
  for (int j = 0; j < n_experts; ++j) {
    double per_replica = expert_loads[j] / replicas[j];
    for (int r = 0; r < replicas[j]; ++r)
      order.push_back({j, per_replica, replicas[j]});
  }
  std::sort(order.begin(), order.end(), [&](const Replica& a,
                                            const Replica& b) {
    if (ratio_greater(expert_loads[a.expert], a.denominator,
                      expert_loads[b.expert], b.denominator))
      return true;
    if (ratio_greater(expert_loads[b.expert], b.denominator,
                      expert_loads[a.expert], a.denominator))
      return false;
    return a.expert < b.expert;
  });

  ExpertLayout layout(n_experts, n_devices);
  std::vector<int> slots_used(n_devices, 0);
  std::vector<double> device_load(n_devices, 0.0);
  // Per-device record of placed (expert, load), needed if a swap repair has
  // to move a replica later.
  std::vector<std::vector<std::pair<int, double>>> placed(n_devices);
  // node_count[j][node] = replicas of expert j already on the node.
  std::vector<std::vector<int>> node_count(
      n_experts, std::vector<int>(topology.n_nodes(), 0));

  auto eligible = [&](int expert, int device) {
    return slots_used[device] < capacity && !layout.hosts(expert, device);
  };

  auto commit = [&](int expert, double load, int device) {
    layout.place(expert, device);
    slots_used[device] += 1;
    device_load[device] += load;
    placed[device].push_back({expert, load});
    node_count[expert][topology.node_of(device)] += 1;
  };

  auto select_device = [&](int expert) -> int {
    // Node sets by replica count of this expert, fewest first; within the
    // chosen set, the least-loaded eligible device.
    std::vector<int> counts;
    for (int node = 0; node < topology.n_nodes(); ++node)
      counts.push_back(node_count[expert][node]);
    std::vector<int> distinct = counts;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    for (int level : distinct) {
      int best = -1;
      for (int node = 0; node < topology.n_nodes(); ++node) {
        if (counts[node] != level) continue;
        int first = node * topology.devices_per_node();
        for (int d = first; d < first + topology.devices_per_node(); ++d) {
          if (!eligible(expert, d)) continue;
          if (best == -1 || device_load[d] < device_load[best]) best = d;
        }
      }
      if (best != -1) return best;
    }
    return -1;
  };

  // Frees a slot for `expert` when every free-slot device already hosts it:
  // move some other expert from a full device onto a free slot, then place
  // here. Scans are index-ascending, keeping the repair deterministic.
  auto repair = [&](int expert) -> int {
    for (int d = 0; d < n_devices; ++d) {
      if (slots_used[d] >= capacity) continue;
      for (int donor = 0; donor < n_devices; ++donor) {
        if (donor == d || layout.hosts(expert, donor)) continue;
        if (slots_used[donor] < capacity) continue;
        for (std::size_t p = 0; p < placed[donor].size(); ++p) {
          auto [moved_expert, moved_load] = placed[donor][p];
          if (layout.hosts(moved_expert, d)) continue;
          layout.remove(moved_expert, donor);
          slots_used[donor] -= 1;
          device_load[donor] -= moved_load;
          node_count[moved_expert][topology.node_of(donor)] -= 1;
          placed[donor].erase(placed[donor].begin() + p);
          commit(moved_expert, moved_load, d);
          return donor;
        }
      }
    }
    return -1;
  };

  for (const Replica& replica : order) {
    int device = select_device(replica.expert);
    if (device == -1) device = repair(replica.expert);
    if (device == -1)
      throw Error(ErrorKind::internal,
                  "expert_relocation: no placement for expert " +
                      std::to_string(replica.expert));
    commit(replica.expert, replica.load, device);
  }

  validate_layout(layout, capacity);
  return layout;
}

ReplicaVector perturb_replicas(const ReplicaVector& replicas, int n_devices,
                               Rng& rng) {
  std::vector<int> donors;
  for (std::size_t j = 0; j < replicas.size(); ++j)
    if (replicas[j] > 1) donors.push_back(static_cast<int>(j));
  if (donors.empty()) return replicas;

  int donor = donors[rng.next_below(donors.size())];
  std::vector<int> recipients;
  for (std::size_t j = 0; j < replicas.size(); ++j)
    if (static_cast<int>(j) != donor && replicas[j] < n_devices)
      recipients.push_back(static_cast<int>(j));
  if (recipients.empty()) return replicas;

  int recipient = recipients[rng.next_below(recipients.size())];
  ReplicaVector out = replicas;
  --out[donor];
  ++out[recipient];
  return out;
}

RoutingPlan lite_routing(const RoutingMatrix& routing,
                         const ExpertLayout& layout,
                         const Topology& topology) {
  const int n_devices = routing.n_devices();
  const int n_experts = routing.n_experts();
  if (layout.n_devices() != n_devices || layout.n_experts() != n_experts)
    throw Error(ErrorKind::invalid_argument,
                "lite_routing: layout dimensions disagree with the routing "
                "matrix");
  if (topology.n_devices() != n_devices)
    throw Error(ErrorKind::invalid_argument,
                "lite_routing: topology disagrees with the routing matrix");

  // hosts_by_node[j][node]: ascending device lists per expert and node.
  std::vector<std::vector<int>> hosts(n_experts);
  std::vector<std::vector<std::vector<int>>> hosts_by_node(
      n_experts, std::vector<std::vector<int>>(topology.n_nodes()));
  for (int j = 0; j < n_experts; ++j)
    for (int d = 0; d < n_devices; ++d)
      if (layout.hosts(j, d)) {
        hosts[j].push_back(d);
        hosts_by_node[j][topology.node_of(d)].push_back(d);
      }

  RoutingPlan plan;
  plan.n_devices = n_devices;
  plan.n_experts = n_experts;
  for (int i = 0; i < n_devices; ++i) {
    const int node = topology.node_of(i);
    for (int j = 0; j < n_experts; ++j) {
      TokenCount tokens = routing.at(i, j);
      if (tokens == 0) continue;
      const std::vector<int>& targets = hosts_by_node[j][node].empty()
                                            ? hosts[j]
                                            : hosts_by_node[j][node];
      if (targets.empty())
        throw Error(ErrorKind::infeasible,
                    "lite_routing: expert " + std::to_string(j) +
                        " has load but no replica");
      const TokenCount share = tokens / targets.size();
      const TokenCount extra = tokens % targets.size();
      for (std::size_t t = 0; t < targets.size(); ++t) {
        TokenCount amount = share + (t < extra ? 1 : 0);
        if (amount > 0)
          plan.entries.push_back({i, j, targets[t], amount});
      }
    }
  }
  return plan;
}

ExpertLayout static_ep_layout(int n_devices, int n_experts, int capacity) {
  check_shape(n_devices, n_experts, capacity);
  ExpertLayout layout(n_experts, n_devices);
  for (int slot = 0; slot < n_devices * capacity; ++slot)
    layout.place(slot % n_experts, slot / capacity);
  validate_layout(layout, capacity);
  return layout;
}

ExpertLayout even_replication_layout(const Topology& topology, int n_experts,
                                     int capacity) {
  const int n_devices = topology.n_devices();
  check_shape(n_devices, n_experts, capacity);
  const int total = n_devices * capacity;
  ReplicaVector replicas(n_experts, total / n_experts);
  for (int j = 0; j < total % n_experts; ++j) ++replicas[j];
  std::vector<double> uniform_loads(n_experts, 1.0);
  return expert_relocation(replicas, uniform_loads, topology, capacity);
}

std::vector<double> AggregatedRouting::expert_loads() const {
  std::vector<double> loads(n_experts, 0.0);
  for (int i = 0; i < n_devices; ++i)
    for (int j = 0; j < n_experts; ++j) loads[j] += at(i, j);
  return loads;
}

RoutingMatrix AggregatedRouting::rounded() const {
  RoutingMatrix out(n_devices, n_experts);
  for (int i = 0; i < n_devices; ++i)
    for (int j = 0; j < n_experts; ++j)
      out.at(i, j) = static_cast<TokenCount>(std::llround(at(i, j)));
  return out;
}

AggregatedRouting aggregate_history(std::span<const RoutingMatrix> history,
                                    HistoryMode mode, double ema_decay) {
  if (history.empty())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_history: empty history");
  const int n_devices = history.front().n_devices();
  const int n_experts = history.front().n_experts();
  for (const RoutingMatrix& r : history)
    if (r.n_devices() != n_devices || r.n_experts() != n_experts)
      throw Error(ErrorKind::invalid_argument,
                  "aggregate_history: inconsistent dimensions");

  AggregatedRouting agg;
  agg.n_devices = n_devices;
  agg.n_experts = n_experts;
  agg.weights.assign(static_cast<std::size_t>(n_devices) * n_experts, 0.0);

  if (mode == HistoryMode::last) {
    const RoutingMatrix& last = history.back();
    for (int i = 0; i < n_devices; ++i)
      for (int j = 0; j < n_experts; ++j)
        agg.weights[static_cast<std::size_t>(i) * n_experts + j] =
            static_cast<double>(last.at(i, j));
    return agg;
  }

  if (!(ema_decay > 0.0) || ema_decay > 1.0)
    throw Error(ErrorKind::invalid_argument,
                "aggregate_history: ema_decay must lie in (0, 1]");
  bool first = true;
  for (const RoutingMatrix& r : history) {
    for (int i = 0; i < n_devices; ++i)
      for (int j = 0; j < n_experts; ++j) {
        auto idx = static_cast<std::size_t>(i) * n_experts + j;
        double value = static_cast<double>(r.at(i, j));
        agg.weights[idx] = first
                               ? value
                               : ema_decay * value +
                                     (1.0 - ema_decay) * agg.weights[idx];
      }
    first = false;
  }
  return agg;
}

ExpertLayout plan_layout(std::span<const RoutingMatrix> history,
                         const Topology& topology, const CostParams& params,
                         int capacity, const LayoutSearchSpec& spec) {
  if (spec.epsilon < 2)
    throw Error(ErrorKind::invalid_argument,
                "plan_layout: epsilon must be at least 2");
  AggregatedRouting agg =
      aggregate_history(history, spec.history_mode, spec.ema_decay);
  const int n_devices = agg.n_devices;
  const int n_experts = agg.n_experts;
  check_shape(n_devices, n_experts, capacity);
  if (topology.n_devices() != n_devices)
    throw Error(ErrorKind::invalid_argument,
                "plan_layout: topology disagrees with the history");

  std::vector<double> loads = agg.expert_loads();
  std::vector<ReplicaVector> candidates;
  candidates.push_back(
      replica_allocation(loads, n_devices, n_experts, capacity));

  const int total = n_devices * capacity;
  ReplicaVector even(n_experts, total / n_experts);
  for (int j = 0; j < total % n_experts; ++j) ++even[j];
  candidates.push_back(even);

  Rng rng(mix_seed(spec.seed, 0x706c616e));
  while (static_cast<int>(candidates.size()) < spec.epsilon) {
    ReplicaVector base = candidates[rng.next_below(candidates.size())];
    candidates.push_back(perturb_replicas(base, n_devices, rng));
  }

  RoutingMatrix score_matrix = agg.rounded();
  ExpertLayout best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const ReplicaVector& replicas : candidates) {
    ExpertLayout layout =
        expert_relocation(replicas, loads, topology, capacity);
    RoutingPlan plan = lite_routing(score_matrix, layout, topology);
    double cost = time_cost(plan, topology, params).t_total;
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(layout);
    }
  }
  return best;
}

}  // namespace moeplan
