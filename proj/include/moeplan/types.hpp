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

#ifndef MOEPLAN_TYPES_HPP_
#define MOEPLAN_TYPES_HPP_

#include <cstdint>
#include <vector>

namespace moeplan {

using TokenCount = std::uint64_t;

// Per-(layer, iteration) routing counts: tokens on device i destined for
// expert j. Dense row-major N x E.
class RoutingMatrix {
 public:
  RoutingMatrix() = default;
  RoutingMatrix(int n_devices, int n_experts);

  int n_devices() const { return n_devices_; }
  int n_experts() const { return n_experts_; }

  TokenCount& at(int device, int expert) {
    return counts_[static_cast<std::size_t>(device) * n_experts_ + expert];
  }
  TokenCount at(int device, int expert) const {
    return counts_[static_cast<std::size_t>(device) * n_experts_ + expert];
  }

  TokenCount row_sum(int device) const;
  TokenCount total() const;
  // Column sums, as doubles so they can feed load-based planning directly.
  std::vector<double> expert_loads() const;

  bool operator==(const RoutingMatrix& other) const = default;

 private:
  int n_devices_ = 0;
  int n_experts_ = 0;
  std::vector<TokenCount> counts_;
};

struct TraceRecord {
  std::uint32_t iteration = 0;
  std::uint32_t layer = 0;
  RoutingMatrix routing;
};

// Replica placement: cell (expert, device) is 1 when the device materializes
// a full copy of the expert for the iteration. At most one copy of an expert
// per device.
class ExpertLayout {
 public:
  ExpertLayout() = default;
  ExpertLayout(int n_experts, int n_devices);

  int n_experts() const { return n_experts_; }
  int n_devices() const { return n_devices_; }

  bool hosts(int expert, int device) const {
    return cells_[static_cast<std::size_t>(expert) * n_devices_ + device] != 0;
  }
  void place(int expert, int device);
  void remove(int expert, int device);

  int replicas_of(int expert) const;
  int experts_on(int device) const;
  std::vector<int> host_devices(int expert) const;

  bool operator==(const ExpertLayout& other) const = default;

 private:
  int n_experts_ = 0;
  int n_devices_ = 0;
  std::vector<std::uint8_t> cells_;
};

// One resolved token transfer: `tokens` tokens from `src`, destined for
// `expert`, computed on `dst`.
struct PlanEntry {
  int src = 0;
  int expert = 0;
  int dst = 0;
  TokenCount tokens = 0;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

// Sparse token routing: entries have tokens > 0 and are sorted by
// (src, expert, dst).
struct RoutingPlan {
  int n_devices = 0;
  int n_experts = 0;
  std::vector<PlanEntry> entries;
};

// Replica count per expert; every expert has at least one and the counts sum
// to n_devices * capacity.
using ReplicaVector = std::vector<int>;

// Invariant validators. Each throws Error(invalid_argument) with a message
// naming the first violated constraint.
void validate_layout(const ExpertLayout& layout, int capacity);
void validate_replicas(const ReplicaVector& replicas, int n_devices,
                       int capacity);
// Checks token conservation against `routing` and hosting against `layout`.
void validate_plan(const RoutingPlan& plan, const RoutingMatrix& routing,
                   const ExpertLayout& layout);

}  // namespace moeplan

#endif  // MOEPLAN_TYPES_HPP_
