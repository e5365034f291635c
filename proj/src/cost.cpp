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

#include "moeplan/cost.hpp"

#include <algorithm>
#include <cmath>

#include "moeplan/error.hpp"

namespace moeplan {

void validate_cost_params(const CostParams& params) {
  if (!(params.v_comm > 0.0) || !(params.v_comp > 0.0) ||
      !(params.b_comp > 0.0))
    throw Error(ErrorKind::invalid_argument,
                "cost params: v_comm, v_comp, b_comp must be positive");
  if (params.f_ckpt != 0 && params.f_ckpt != 1)
    throw Error(ErrorKind::invalid_argument,
                "cost params: f_ckpt must be 0 or 1");
}

TokenCount CostBreakdown::max_recv_tokens() const {
  TokenCount max_recv = 0;
  for (TokenCount r : per_device_recv_tokens) max_recv = std::max(max_recv, r);
  return max_recv;
}

CostBreakdown time_cost(const RoutingPlan& plan, const Topology& topology,
                        const CostParams& params) {
  validate_cost_params(params);
  const int n = topology.n_devices();
  if (plan.n_devices != n)
    throw Error(ErrorKind::invalid_argument,
                "time_cost: plan device count disagrees with the topology");

  CostBreakdown out;
  out.per_device_fw_comp.assign(n, 0.0);
  out.per_device_recv_tokens.assign(n, 0);

  double transfer_seconds = 0.0;
  for (const PlanEntry& e : plan.entries) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw Error(ErrorKind::invalid_argument,
                  "time_cost: plan entry device out of range");
    out.per_device_recv_tokens[e.dst] += e.tokens;
    if (e.src != e.dst)
      transfer_seconds += static_cast<double>(e.tokens) /
                          topology.link_bandwidth(e.src, e.dst);
  }
  out.t_comm = 4.0 * params.v_comm * transfer_seconds;

  double max_fw = 0.0;
  for (int i = 0; i < n; ++i) {
    out.per_device_fw_comp[i] =
        params.v_comp * static_cast<double>(out.per_device_recv_tokens[i]) /
        params.b_comp;
    max_fw = std::max(max_fw, out.per_device_fw_comp[i]);
  }
  out.t_comp = (3.0 + params.f_ckpt) * max_fw;
  out.t_total = out.t_comm + out.t_comp;
  return out;
}

CommVolumes comm_volume_ratio(const AnalysisConfig& config) {
  if (config.p_fsep <= 0 || config.p_ep <= 0 || config.p_fsdp <= 0)
    throw Error(ErrorKind::invalid_argument,
                "comm_volume_ratio: parallel dims must be positive");
  if (config.p_ep * config.p_fsdp != config.p_fsep)
    throw Error(ErrorKind::invalid_argument,
                "comm_volume_ratio: requires p_ep * p_fsdp == p_fsep");
  if (config.n_experts > 0 && config.capacity > 0 &&
      config.capacity * config.p_ep != config.n_experts)
    throw Error(ErrorKind::invalid_argument,
                "comm_volume_ratio: requires capacity * p_ep == n_experts");
  if (config.capacity <= 0)
    throw Error(ErrorKind::invalid_argument,
                "comm_volume_ratio: capacity must be positive");
  if (config.p_fsdp == 1)
    throw Error(ErrorKind::invalid_argument,
                "comm_volume_ratio: undefined for p_fsdp = 1 (the baseline "
                "performs no parameter gathering)");

  CommVolumes out;
  out.v_fsep = config.capacity *
               (static_cast<double>(config.p_fsep) - 1.0) / config.p_fsep *
               config.psi_expert;
  out.v_fsdp = (static_cast<double>(config.p_fsdp) - 1.0) / config.p_fsdp *
               config.capacity * config.psi_expert;
  out.ratio = (static_cast<double>(config.p_fsep) - 1.0) * config.p_fsdp /
              (static_cast<double>(config.p_fsep) *
               (static_cast<double>(config.p_fsdp) - 1.0));
  return out;
}

MemoryFootprint memory_footprint(const AnalysisConfig& config) {
  if (config.p_fsep <= 0)
    throw Error(ErrorKind::invalid_argument,
                "memory_footprint: p_fsep must be positive");
  if (config.psi_all < 0.0 || config.psi_other < 0.0 ||
      config.psi_expert < 0.0 || config.capacity < 0)
    throw Error(ErrorKind::invalid_argument,
                "memory_footprint: sizes must be non-negative");

  MemoryFootprint out;
  out.optimizer_fraction = 1.0 / config.p_fsep;
  out.parameter_bytes = config.psi_all / config.p_fsep + config.psi_other +
                        2.0 * config.capacity * config.psi_expert;
  out.gradient_bytes = out.parameter_bytes;
  return out;
}

std::uint64_t overlap_min_tokens(const AnalysisConfig& config,
                                 double net_bandwidth, double b_comp) {
  if (config.capacity <= 0 || config.topk <= 0 ||
      config.bytes_per_element <= 0)
    throw Error(ErrorKind::invalid_argument,
                "overlap_min_tokens: capacity, topk, bytes_per_element must "
                "be positive");
  if (!(net_bandwidth > 0.0) || !(b_comp > 0.0))
    throw Error(ErrorKind::invalid_argument,
                "overlap_min_tokens: bandwidth and compute rate must be "
                "positive");

  // Compute covers prefetch when
  //   S * K * 6*H*H' / b_comp >= 3 * C * H * H' * bytes / net_bandwidth;
  // both sides scale with H*H', leaving the threshold independent of the
  // hidden sizes.
  double threshold = static_cast<double>(config.capacity) *
                     config.bytes_per_element * b_comp /
                     (2.0 * config.topk * net_bandwidth);
  return static_cast<std::uint64_t>(std::ceil(threshold));
}

}  // namespace moeplan
