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

#include "moeplan/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "moeplan/error.hpp"
#include "moeplan/rng.hpp"

namespace moeplan {

namespace {

void check_gen_spec(const TraceGenSpec& spec) {
  if (spec.n_devices <= 0 || spec.n_experts <= 0 || spec.n_layers <= 0 ||
      spec.n_iterations <= 0)
    throw Error(ErrorKind::invalid_argument,
                "generate_trace: dimensions must be positive");
  if (spec.tokens_per_device == 0)
    throw Error(ErrorKind::invalid_argument,
                "generate_trace: tokens_per_device must be positive");
  if (!(spec.skew_alpha > 0.0))
    throw Error(ErrorKind::invalid_argument,
                "generate_trace: skew_alpha must be positive");
  if (spec.drift_sigma < 0.0)
    throw Error(ErrorKind::invalid_argument,
                "generate_trace: drift_sigma must be non-negative");
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - max_logit);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Rounds shares * total to integers preserving the exact total. Remainder
// tokens go to the largest fractional parts, lowest index first on ties.
std::vector<TokenCount> largest_remainder(const std::vector<double>& shares,
                                          TokenCount total) {
  const int n = static_cast<int>(shares.size());
  std::vector<TokenCount> counts(n, 0);
  std::vector<std::pair<double, int>> fractions(n);
  TokenCount assigned = 0;
  for (int j = 0; j < n; ++j) {
    double exact = shares[j] * static_cast<double>(total);
    auto base = static_cast<TokenCount>(std::floor(exact));
    if (base > total) base = total;
    counts[j] = base;
    assigned += base;
    fractions[j] = {exact - std::floor(exact), j};
  }
  std::sort(fractions.begin(), fractions.end(), [](const auto& a,
                                                   const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  TokenCount leftover = total - assigned;
  for (TokenCount r = 0; r < leftover; ++r) ++counts[fractions[r % n].second];
  return counts;
}

}  // namespace

std::vector<TraceRecord> generate_trace(const TraceGenSpec& spec) {
  check_gen_spec(spec);
  const int E = spec.n_experts;
  std::vector<TraceRecord> records;
  records.reserve(static_cast<std::size_t>(spec.n_layers) *
                  spec.n_iterations);

  for (int layer = 0; layer < spec.n_layers; ++layer) {
    Rng rng(mix_seed(spec.seed, 0x74726163, static_cast<std::uint64_t>(layer)));
    // Initial logits are log-gamma draws, so the iteration-0 popularity is a
    // symmetric Dirichlet with concentration skew_alpha; the random walk
    // then drifts the hotspots while keeping them persistent across
    // iterations.
    std::vector<double> logits(E);
    for (int j = 0; j < E; ++j)
      logits[j] = std::log(std::max(rng.next_gamma(spec.skew_alpha), 1e-290));
    for (int iter = 0; iter < spec.n_iterations; ++iter) {
      if (iter > 0)
        for (int j = 0; j < E; ++j)
          logits[j] += spec.drift_sigma * rng.next_normal();
      std::vector<double> popularity = softmax(logits);
      std::vector<TokenCount> row =
          largest_remainder(popularity, spec.tokens_per_device);

      TraceRecord record;
      record.iteration = static_cast<std::uint32_t>(iter);
      record.layer = static_cast<std::uint32_t>(layer);
      record.routing = RoutingMatrix(spec.n_devices, E);
      for (int i = 0; i < spec.n_devices; ++i)
        for (int j = 0; j < E; ++j) record.routing.at(i, j) = row[j];
      records.push_back(std::move(record));
    }
  }

  std::sort(records.begin(), records.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              return std::tie(a.iteration, a.layer) <
                     std::tie(b.iteration, b.layer);
            });
  return records;
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::vector<TraceRecord> records;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  int n_devices = -1;
  int n_experts = -1;
  std::string line;
  long line_no = 0;

  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorKind::parse,
                "trace line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::size_t last = line.find_last_not_of(" \t\r");
    if (last == std::string::npos) continue;  // blank line
    line.resize(last + 1);

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed JSON (") + e.what() + ")");
    }
    if (!doc.is_object() || !doc.contains("iter") || !doc.contains("layer") ||
        !doc.contains("R"))
      fail("record must be an object with keys iter, layer, R");
    if (!doc["iter"].is_number_unsigned() ||
        !doc["layer"].is_number_unsigned())
      fail("iter and layer must be non-negative integers");
    if (doc["iter"].get<std::uint64_t>() > 0xffffffffULL ||
        doc["layer"].get<std::uint64_t>() > 0xffffffffULL)
      fail("iter and layer must fit in 32 bits");
    if (!doc["R"].is_array() || doc["R"].empty()) fail("R must be a non-empty array");

    const auto& rows = doc["R"];
    int n = static_cast<int>(rows.size());
    int e = -1;
    for (const auto& row : rows) {
      if (!row.is_array() || row.empty()) fail("R rows must be non-empty arrays");
      if (e == -1)
        e = static_cast<int>(row.size());
      else if (static_cast<int>(row.size()) != e)
        fail("ragged R matrix");
    }
    if (n_devices == -1) {
      n_devices = n;
      n_experts = e;
    } else if (n != n_devices || e != n_experts) {
      fail("dimension mismatch: got " + std::to_string(n) + "x" +
           std::to_string(e) + ", expected " + std::to_string(n_devices) +
           "x" + std::to_string(n_experts));
    }

    TraceRecord record;
    record.iteration = doc["iter"].get<std::uint32_t>();
    record.layer = doc["layer"].get<std::uint32_t>();
    record.routing = RoutingMatrix(n, e);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < e; ++j) {
        const auto& cell = rows[i][j];
        if (!cell.is_number_unsigned()) {
          if (cell.is_number_integer()) fail("negative count");
          fail("counts must be non-negative integers");
        }
        record.routing.at(i, j) = cell.get<TokenCount>();
      }

    if (!seen.insert({record.iteration, record.layer}).second)
      fail("duplicate (iter, layer) pair");
    records.push_back(std::move(record));
  }

  std::sort(records.begin(), records.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              return std::tie(a.iteration, a.layer) <
                     std::tie(b.iteration, b.layer);
            });
  return records;
}

std::vector<TraceRecord> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open trace file: " + path);
  return parse_trace(in);
}

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out) {
  for (const TraceRecord& record : records) {
    out << "{\"iter\":" << record.iteration
        << ",\"layer\":" << record.layer << ",\"R\":[";
    for (int i = 0; i < record.routing.n_devices(); ++i) {
      if (i > 0) out << ',';
      out << '[';
      for (int j = 0; j < record.routing.n_experts(); ++j) {
        if (j > 0) out << ',';
        out << record.routing.at(i, j);
      }
      out << ']';
    }
    out << "]}\n";
  }
}

void save_trace(const std::vector<TraceRecord>& records,
                const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::io, "cannot open trace file for writing: " + path);
  write_trace(records, out);
  if (!out)
    throw Error(ErrorKind::io, "failed writing trace file: " + path);
}

std::vector<TraceStats> trace_stats(const std::vector<TraceRecord>& records) {
  if (records.empty())
    throw Error(ErrorKind::invalid_argument, "trace_stats: empty trace");
  std::vector<TraceStats> all;
  all.reserve(records.size());
  for (const TraceRecord& record : records) {
    TraceStats stats;
    stats.iteration = record.iteration;
    stats.layer = record.layer;
    const int E = record.routing.n_experts();
    stats.expert_load.assign(E, 0);
    for (int i = 0; i < record.routing.n_devices(); ++i)
      for (int j = 0; j < E; ++j)
        stats.expert_load[j] += record.routing.at(i, j);
    stats.total_tokens = std::accumulate(stats.expert_load.begin(),
                                         stats.expert_load.end(),
                                         TokenCount{0});
    stats.expert_share.resize(E);
    if (stats.total_tokens == 0) {
      stats.zero_total = true;
      std::fill(stats.expert_share.begin(), stats.expert_share.end(),
                1.0 / E);
    } else {
      for (int j = 0; j < E; ++j)
        stats.expert_share[j] = static_cast<double>(stats.expert_load[j]) /
                                static_cast<double>(stats.total_tokens);
    }
    stats.max_share =
        *std::max_element(stats.expert_share.begin(), stats.expert_share.end());
    stats.min_share =
        *std::min_element(stats.expert_share.begin(), stats.expert_share.end());
    all.push_back(std::move(stats));
  }
  return all;
}

}  // namespace moeplan
