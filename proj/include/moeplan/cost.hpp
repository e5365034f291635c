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

#ifndef MOEPLAN_COST_HPP_
#define MOEPLAN_COST_HPP_

#include <cstdint>
#include <vector>

#include "moeplan/topology.hpp"
#include "moeplan/types.hpp"

namespace moeplan {

struct CostParams {
  double v_comm = 0.0;  // bytes sent per token per dispatch hop
  double v_comp = 0.0;  // FLOPs per token of forward expert computation
  double b_comp = 0.0;  // FLOPs/second per device
  int f_ckpt = 0;       // 1 when activation recomputation is enabled
};

void validate_cost_params(const CostParams& params);

struct CostBreakdown {
  double t_comm = 0.0;
  double t_comp = 0.0;
  double t_total = 0.0;
  std::vector<double> per_device_fw_comp;       // seconds
  std::vector<TokenCount> per_device_recv_tokens;

  TokenCount max_recv_tokens() const;
};

// Models one MoE layer pass: dispatch/combine happen four times per
// iteration (forward and backward), and backward compute counts twice the
// forward, plus once more under recomputation. Communication sums
// point-to-point transfers serially; a token staying on its device is free.
CostBreakdown time_cost(const RoutingPlan& plan, const Topology& topology,
                        const CostParams& params);

// Inputs for the paradigm-level analytic comparisons. Parameter sizes in
// bytes; dimensions are the sharding group sizes being compared.
struct AnalysisConfig {
  int p_fsep = 0;
  int p_ep = 0;
  int p_fsdp = 0;
  double psi_expert = 0.0;
  double psi_other = 0.0;
  double psi_all = 0.0;
  int capacity = 0;
  int n_experts = 0;          // optional; checked against capacity * p_ep
  int hidden = 0;             // H
  int intermediate = 0;       // H'
  int topk = 0;               // K
  std::uint64_t tokens_per_device = 0;  // S
  int bytes_per_element = 2;  // bf16 default
};

struct CommVolumes {
  // Bytes each device moves per parameter gather: all-to-all over the full
  // device group vs. allgather within a smaller sharding group.
  double v_fsep = 0.0;
  double v_fsdp = 0.0;
  double ratio = 0.0;
};

CommVolumes comm_volume_ratio(const AnalysisConfig& config);

struct MemoryFootprint {
  double optimizer_fraction = 0.0;
  double parameter_bytes = 0.0;
  double gradient_bytes = 0.0;
};

MemoryFootprint memory_footprint(const AnalysisConfig& config);

// Smallest per-device token count S such that expert compute time covers the
// prefetch transfer of the next layer's experts. The hidden sizes cancel:
// S = ceil(C * bytes_per_element * b_comp / (2 * K * net_bandwidth)).
std::uint64_t overlap_min_tokens(const AnalysisConfig& config,
                                 double net_bandwidth, double b_comp);

}  // namespace moeplan

#endif  // MOEPLAN_COST_HPP_
