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

#include "moeplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "moeplan/error.hpp"

namespace moeplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimal min-cost max-flow (successive shortest paths with potentials,
// chunked augmentation). Graphs here have a couple dozen nodes.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : graph_(n) {}

  // Returns the forward arc's index within the source adjacency list.
  int add_arc(int from, int to, long long cap, double cost) {
    graph_[from].push_back(
        {to, cap, cost, static_cast<int>(graph_[to].size())});
    graph_[to].push_back(
        {from, 0, -cost, static_cast<int>(graph_[from].size()) - 1});
    return static_cast<int>(graph_[from].size()) - 1;
  }

  // Pushes up to `want` units from s to t; returns (flow, total cost).
  std::pair<long long, double> solve(int s, int t, long long want) {
    const int n = static_cast<int>(graph_.size());
    std::vector<double> potential(n, 0.0);
    long long flow = 0;
    double cost = 0.0;
    while (flow < want) {
      std::vector<double> dist(n, kInf);
      std::vector<int> prev_node(n, -1), prev_arc(n, -1);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[s] = 0.0;
      heap.push({0.0, s});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int a = 0; a < static_cast<int>(graph_[u].size()); ++a) {
          const Arc& arc = graph_[u][a];
          if (arc.cap <= 0) continue;
          double nd = d + arc.cost + potential[u] - potential[arc.to];
          if (nd < dist[arc.to] - 1e-15) {
            dist[arc.to] = nd;
            prev_node[arc.to] = u;
            prev_arc[arc.to] = a;
            heap.push({nd, arc.to});
          }
        }
      }
      if (dist[t] == kInf) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) potential[v] += dist[v];

      long long push = want - flow;
      for (int v = t; v != s; v = prev_node[v])
        push = std::min(push, graph_[prev_node[v]][prev_arc[v]].cap);
      for (int v = t; v != s; v = prev_node[v]) {
        Arc& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.cap -= push;
        graph_[arc.to][arc.rev].cap += push;
        cost += push * arc.cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

  long long arc_flow(int from, int arc_index) const {
    const Arc& arc = graph_[from][arc_index];
    return graph_[arc.to][arc.rev].cap;  // reverse capacity == pushed flow
  }

 private:
  struct Arc {
    int to;
    long long cap;
    double cost;
    int rev;
  };
  std::vector<std::vector<Arc>> graph_;
};

struct Cell {
  int src;
  int expert;
  long long units;
};

std::uint64_t routing_gcd(const RoutingMatrix& routing) {
  std::uint64_t g = 0;
  for (int i = 0; i < routing.n_devices(); ++i)
    for (int j = 0; j < routing.n_experts(); ++j)
      if (routing.at(i, j) > 0) g = std::gcd(g, routing.at(i, j));
  return g == 0 ? 1 : g;
}

}  // namespace

AllocationResult exact_allocation(std::span<const double> expert_loads,
                                  int n_devices, int n_experts,
                                  int capacity) {
  if (n_devices <= 0 || n_experts <= 0 || capacity <= 0)
    throw Error(ErrorKind::invalid_argument,
                "exact_allocation: dimensions must be positive");
  const long long total = static_cast<long long>(n_devices) * capacity;
  if (total > 12 || n_experts > 6)
    throw Error(ErrorKind::invalid_argument,
                "exact_allocation: enumeration bounds are n_devices * "
                "capacity <= 12 and n_experts <= 6");
  if (n_experts > total)
    throw Error(ErrorKind::infeasible,
                "exact_allocation: more experts than replica slots");
  if (capacity > n_experts)
    throw Error(ErrorKind::infeasible,
                "exact_allocation: capacity exceeds the expert count");
  if (static_cast<int>(expert_loads.size()) != n_experts)
    throw Error(ErrorKind::invalid_argument,
                "exact_allocation: loads size disagrees with n_experts");

  AllocationResult best;
  best.objective = kInf;
  ReplicaVector current(n_experts, 0);

  auto recurse = [&](auto&& self, int expert, long long remaining,
                     double partial_max) -> void {
    if (partial_max >= best.objective) return;
    if (expert == n_experts) {
      if (remaining == 0 && partial_max < best.objective) {
        best.objective = partial_max;
        best.replicas = current;
      }
      return;
    }
    const int tail = n_experts - expert - 1;
    long long lo = std::max<long long>(
        1, remaining - static_cast<long long>(tail) * n_devices);
    long long hi = std::min<long long>(n_devices, remaining - tail);
    for (long long r = lo; r <= hi; ++r) {
      current[expert] = static_cast<int>(r);
      double ratio = expert_loads[expert] / static_cast<double>(r);
      self(self, expert + 1, remaining - r, std::max(partial_max, ratio));
    }
    current[expert] = 0;
  };
  recurse(recurse, 0, total, 0.0);

  if (best.objective == kInf)
    throw Error(ErrorKind::infeasible, "exact_allocation: no feasible vector");
  return best;
}

ExactSolution solve_exact(const RoutingMatrix& routing,
                          const Topology& topology, const CostParams& params,
                          int capacity, const OracleBudget& budget) {
  validate_cost_params(params);
  const int n_devices = routing.n_devices();
  const int n_experts = routing.n_experts();
  if (topology.n_devices() != n_devices)
    throw Error(ErrorKind::invalid_argument,
                "solve_exact: topology disagrees with the routing matrix");
  if (n_devices > kOracleMaxDevices || n_experts > kOracleMaxExperts ||
      capacity > kOracleMaxCapacity || capacity <= 0)
    throw Error(ErrorKind::invalid_argument,
                "solve_exact: enumeration bounds are n_devices <= 4, "
                "n_experts <= 4, capacity in [1, 2]");
  if (n_experts > n_devices * capacity || capacity > n_experts)
    throw Error(ErrorKind::infeasible,
                "solve_exact: no layout fits this shape");

  std::uint64_t granularity = budget.max_token_granularity == 0
                                  ? routing_gcd(routing)
                                  : budget.max_token_granularity;
  std::vector<Cell> cells;
  for (int i = 0; i < n_devices; ++i)
    for (int j = 0; j < n_experts; ++j) {
      TokenCount tokens = routing.at(i, j);
      if (tokens == 0) continue;
      if (tokens % granularity != 0)
        throw Error(ErrorKind::invalid_argument,
                    "solve_exact: granularity " + std::to_string(granularity) +
                        " does not divide count at (device " +
                        std::to_string(i) + ", expert " + std::to_string(j) +
                        ")");
      auto units = static_cast<long long>(tokens / granularity);
      if (static_cast<std::uint64_t>(units) > kOracleMaxUnitsPerCell)
        throw Error(ErrorKind::invalid_argument,
                    "solve_exact: cell (device " + std::to_string(i) +
                        ", expert " + std::to_string(j) + ") has " +
                        std::to_string(units) +
                        " routing units; the bound is " +
                        std::to_string(kOracleMaxUnitsPerCell));
      cells.push_back({i, j, units});
    }
  const long long total_units =
      std::accumulate(cells.begin(), cells.end(), 0LL,
                      [](long long acc, const Cell& c) { return acc + c.units; });

  const double g_tokens = static_cast<double>(granularity);
  const double comp_per_token = (3.0 + params.f_ckpt) * params.v_comp /
                                params.b_comp;
  auto unit_comm_cost = [&](int src, int dst) {
    if (src == dst) return 0.0;
    return 4.0 * params.v_comm * g_tokens / topology.link_bandwidth(src, dst);
  };

  // All C-subsets of experts a device may host, in lexicographic order.
  std::vector<std::vector<int>> device_choices;
  {
    std::vector<int> pick;
    auto gen = [&](auto&& self, int start) -> void {
      if (static_cast<int>(pick.size()) == capacity) {
        device_choices.push_back(pick);
        return;
      }
      for (int j = start; j < n_experts; ++j) {
        pick.push_back(j);
        self(self, j + 1);
        pick.pop_back();
      }
    };
    gen(gen, 0);
  }

  ExactSolution best;
  best.granularity = granularity;
  double best_cost = kInf;

  // Evaluates one complete layout: sweep the received-unit cap M upward,
  // solving a min-cost flow per M; the layout's optimum is the cheapest
  // reconstructed plan.
  auto evaluate_layout = [&](const ExpertLayout& layout) {
    std::vector<std::vector<int>> hosts(n_experts);
    for (int j = 0; j < n_experts; ++j) hosts[j] = layout.host_devices(j);

    if (total_units == 0) {
      if (best_cost > 0.0) {
        best_cost = 0.0;
        best.layout = layout;
        best.plan = RoutingPlan{n_devices, n_experts, {}};
        best.cost = time_cost(best.plan, topology, params);
      }
      return;
    }

    double unconstrained_comm = 0.0;
    std::vector<long long> expert_units(n_experts, 0);
    for (const Cell& cell : cells) {
      double cheapest = kInf;
      for (int dst : hosts[cell.expert])
        cheapest = std::min(cheapest, unit_comm_cost(cell.src, dst));
      unconstrained_comm += cheapest * static_cast<double>(cell.units);
      expert_units[cell.expert] += cell.units;
    }

    long long m_low = (total_units + n_devices - 1) / n_devices;
    for (int j = 0; j < n_experts; ++j) {
      long long hosted = static_cast<long long>(hosts[j].size());
      if (expert_units[j] > 0)
        m_low = std::max(m_low, (expert_units[j] + hosted - 1) / hosted);
    }

    const int n_cells = static_cast<int>(cells.size());
    const int src_node = 0;
    const int dev_base = 1 + n_cells;
    const int sink = dev_base + n_devices;

    for (long long cap_units = m_low; cap_units <= total_units; ++cap_units) {
      double comp_floor = comp_per_token * g_tokens *
                          static_cast<double>(cap_units);
      if (unconstrained_comm + comp_floor >= best_cost) break;

      MinCostFlow flow(sink + 1);
      std::vector<std::vector<int>> cell_arcs(n_cells);
      for (int c = 0; c < n_cells; ++c) {
        flow.add_arc(src_node, 1 + c, cells[c].units, 0.0);
        for (int dst : hosts[cells[c].expert])
          cell_arcs[c].push_back(flow.add_arc(
              1 + c, dev_base + dst, cells[c].units,
              unit_comm_cost(cells[c].src, dst)));
      }
      for (int d = 0; d < n_devices; ++d)
        flow.add_arc(dev_base + d, sink, cap_units, 0.0);

      auto [pushed, comm_cost] = flow.solve(src_node, sink, total_units);
      if (pushed < total_units) continue;  // cap too tight for this layout

      RoutingPlan plan;
      plan.n_devices = n_devices;
      plan.n_experts = n_experts;
      for (int c = 0; c < n_cells; ++c)
        for (std::size_t h = 0; h < hosts[cells[c].expert].size(); ++h) {
          long long units = flow.arc_flow(1 + c, cell_arcs[c][h]);
          if (units > 0)
            plan.entries.push_back({cells[c].src, cells[c].expert,
                                    hosts[cells[c].expert][h],
                                    static_cast<TokenCount>(units) *
                                        granularity});
        }
      std::sort(plan.entries.begin(), plan.entries.end(),
                [](const PlanEntry& a, const PlanEntry& b) {
                  return std::tie(a.src, a.expert, a.dst) <
                         std::tie(b.src, b.expert, b.dst);
                });

      CostBreakdown cb = time_cost(plan, topology, params);
      if (cb.t_total < best_cost) {
        best_cost = cb.t_total;
        best.layout = layout;
        best.plan = std::move(plan);
        best.cost = cb;
      }
      // Communication is already at its unconstrained minimum; relaxing the
      // cap further cannot help.
      if (comm_cost <= unconstrained_comm +
                           1e-12 * (1.0 + std::abs(unconstrained_comm)))
        break;
    }
  };

  // Enumerate layouts device by device; keep only those hosting every
  // expert. Deduplication by device permutation is deliberately not applied:
  // with a fixed routing matrix, permuting destination devices changes which
  // transfers are local, so permuted layouts are not cost-equivalent.
  std::vector<int> chosen(n_devices, 0);
  bool feasible_seen = false;
  auto enumerate = [&](auto&& self, int device) -> void {
    if (best.budget_exceeded) return;
    if (device == n_devices) {
      std::vector<int> coverage(n_experts, 0);
      for (int d = 0; d < n_devices; ++d)
        for (int j : device_choices[chosen[d]]) ++coverage[j];
      for (int j = 0; j < n_experts; ++j)
        if (coverage[j] == 0) return;

      if (++best.layouts_examined > budget.max_layout_candidates) {
        best.budget_exceeded = true;
        --best.layouts_examined;
        return;
      }
      ExpertLayout layout(n_experts, n_devices);
      for (int d = 0; d < n_devices; ++d)
        for (int j : device_choices[chosen[d]]) layout.place(j, d);
      feasible_seen = true;
      evaluate_layout(layout);
      return;
    }
    for (std::size_t choice = 0; choice < device_choices.size(); ++choice) {
      chosen[device] = static_cast<int>(choice);
      self(self, device + 1);
      if (best.budget_exceeded) return;
    }
  };
  enumerate(enumerate, 0);

  if (!feasible_seen)
    throw Error(ErrorKind::infeasible, "solve_exact: no feasible layout");
  if (best_cost == kInf)
    throw Error(ErrorKind::internal, "solve_exact: no routing found");
  return best;
}

}  // namespace moeplan
