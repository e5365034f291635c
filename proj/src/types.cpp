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

#include "moeplan/types.hpp"

#include <map>
#include <tuple>
#include <string>
#include <utility>

#include "moeplan/error.hpp"

namespace moeplan {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::invalid_argument, message);
}

}  // namespace

RoutingMatrix::RoutingMatrix(int n_devices, int n_experts)
    : n_devices_(n_devices), n_experts_(n_experts) {
  require(n_devices > 0, "RoutingMatrix: n_devices must be positive");
  require(n_experts > 0, "RoutingMatrix: n_experts must be positive");
  counts_.assign(static_cast<std::size_t>(n_devices) * n_experts, 0);
}

TokenCount RoutingMatrix::row_sum(int device) const {
  TokenCount sum = 0;
  for (int j = 0; j < n_experts_; ++j) sum += at(device, j);
  return sum;
}

TokenCount RoutingMatrix::total() const {
  TokenCount sum = 0;
  for (TokenCount c : counts_) sum += c;
  return sum;
}

std::vector<double> RoutingMatrix::expert_loads() const {
  std::vector<double> loads(n_experts_, 0.0);
  for (int i = 0; i < n_devices_; ++i)
    for (int j = 0; j < n_experts_; ++j)
      loads[j] += static_cast<double>(at(i, j));
  return loads;
}

ExpertLayout::ExpertLayout(int n_experts, int n_devices)
    : n_experts_(n_experts), n_devices_(n_devices) {
  require(n_experts > 0, "ExpertLayout: n_experts must be positive");
  require(n_devices > 0, "ExpertLayout: n_devices must be positive");
  cells_.assign(static_cast<std::size_t>(n_experts) * n_devices, 0);
}

void ExpertLayout::place(int expert, int device) {
  auto& cell = cells_[static_cast<std::size_t>(expert) * n_devices_ + device];
  if (cell != 0)
    throw Error(ErrorKind::internal,
                "ExpertLayout: duplicate replica of expert " +
                    std::to_string(expert) + " on device " +
                    std::to_string(device));
  cell = 1;
}

void ExpertLayout::remove(int expert, int device) {
  auto& cell = cells_[static_cast<std::size_t>(expert) * n_devices_ + device];
  if (cell == 0)
    throw Error(ErrorKind::internal, "ExpertLayout: removing absent replica");
  cell = 0;
}

int ExpertLayout::replicas_of(int expert) const {
  int count = 0;
  for (int i = 0; i < n_devices_; ++i) count += hosts(expert, i) ? 1 : 0;
  return count;
}

int ExpertLayout::experts_on(int device) const {
  int count = 0;
  for (int j = 0; j < n_experts_; ++j) count += hosts(j, device) ? 1 : 0;
  return count;
}

std::vector<int> ExpertLayout::host_devices(int expert) const {
  std::vector<int> hosts_list;
  for (int i = 0; i < n_devices_; ++i)
    if (hosts(expert, i)) hosts_list.push_back(i);
  return hosts_list;
}

void validate_layout(const ExpertLayout& layout, int capacity) {
  require(capacity > 0, "layout: capacity must be positive");
  for (int i = 0; i < layout.n_devices(); ++i)
    require(layout.experts_on(i) == capacity,
            "layout: device " + std::to_string(i) + " hosts " +
                std::to_string(layout.experts_on(i)) + " experts, expected " +
                std::to_string(capacity));
  for (int j = 0; j < layout.n_experts(); ++j)
    require(layout.replicas_of(j) >= 1,
            "layout: expert " + std::to_string(j) + " has no replica");
}

void validate_replicas(const ReplicaVector& replicas, int n_devices,
                       int capacity) {
  require(!replicas.empty(), "replicas: empty vector");
  long long sum = 0;
  for (std::size_t j = 0; j < replicas.size(); ++j) {
    require(replicas[j] >= 1, "replicas: expert " + std::to_string(j) +
                                  " must have at least one replica");
    require(replicas[j] <= n_devices,
            "replicas: expert " + std::to_string(j) +
                " exceeds the device count");
    sum += replicas[j];
  }
  require(sum == static_cast<long long>(n_devices) * capacity,
          "replicas: counts sum to " + std::to_string(sum) + ", expected " +
              std::to_string(static_cast<long long>(n_devices) * capacity));
}

void validate_plan(const RoutingPlan& plan, const RoutingMatrix& routing,
                   const ExpertLayout& layout) {
  require(plan.n_devices == routing.n_devices() &&
              plan.n_experts == routing.n_experts(),
          "plan: dimensions disagree with the routing matrix");
  require(layout.n_devices() == routing.n_devices() &&
              layout.n_experts() == routing.n_experts(),
          "plan: dimensions disagree with the layout");

  std::map<std::pair<int, int>, TokenCount> routed;
  const PlanEntry* prev = nullptr;
  for (const PlanEntry& e : plan.entries) {
    require(e.src >= 0 && e.src < plan.n_devices &&
                e.dst >= 0 && e.dst < plan.n_devices &&
                e.expert >= 0 && e.expert < plan.n_experts,
            "plan: entry index out of range");
    require(e.tokens > 0, "plan: zero-token entry");
    require(layout.hosts(e.expert, e.dst),
            "plan: tokens for expert " + std::to_string(e.expert) +
                " sent to non-hosting device " + std::to_string(e.dst));
    if (prev != nullptr) {
      bool ordered = std::tie(prev->src, prev->expert, prev->dst) <
                     std::tie(e.src, e.expert, e.dst);
      require(ordered, "plan: entries not sorted by (src, expert, dst)");
    }
    prev = &e;
    routed[{e.src, e.expert}] += e.tokens;
  }
  for (int i = 0; i < routing.n_devices(); ++i)
    for (int j = 0; j < routing.n_experts(); ++j) {
      auto it = routed.find({i, j});
      TokenCount sent = it == routed.end() ? 0 : it->second;
      require(sent == routing.at(i, j),
              "plan: conservation violated at (device " + std::to_string(i) +
                  ", expert " + std::to_string(j) + "): routed " +
                  std::to_string(sent) + " of " +
                  std::to_string(routing.at(i, j)));
    }
}

}  // namespace moeplan
