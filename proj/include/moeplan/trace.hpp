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

#ifndef MOEPLAN_TRACE_HPP_
#define MOEPLAN_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "moeplan/types.hpp"

namespace moeplan {

// Parameters of the synthetic routing generator. Per layer, expert
// popularity starts as a symmetric Dirichlet draw with concentration
// skew_alpha (small alpha = a few hot experts) and its logits follow a
// Gaussian random walk with step drift_sigma, so hotspots persist while
// slowly shifting. Each device's row is the popularity scaled to
// tokens_per_device with largest-remainder rounding, keeping row sums exact.
struct TraceGenSpec {
  int n_devices = 0;
  int n_experts = 0;
  int n_layers = 1;
  int n_iterations = 1;
  TokenCount tokens_per_device = 0;
  double skew_alpha = 1.0;
  double drift_sigma = 0.0;
  std::uint64_t seed = 0;
};

std::vector<TraceRecord> generate_trace(const TraceGenSpec& spec);

// One JSON object per line: {"iter":u32,"layer":u32,"R":[[u64;E];N]}, lines
// ordered by (iter, layer). Parse errors carry 1-based line numbers.
std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> load_trace(const std::string& path);
void write_trace(const std::vector<TraceRecord>& records, std::ostream& out);
void save_trace(const std::vector<TraceRecord>& records,
                const std::string& path);

struct TraceStats {
  std::uint32_t iteration = 0;
  std::uint32_t layer = 0;
  TokenCount total_tokens = 0;
  std::vector<TokenCount> expert_load;
  std::vector<double> expert_share;  // uniform by convention when zero_total
  double max_share = 0.0;
  double min_share = 0.0;
  bool zero_total = false;
};

std::vector<TraceStats> trace_stats(const std::vector<TraceRecord>& records);

}  // namespace moeplan

#endif  // MOEPLAN_TRACE_HPP_
