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

#include "moeplan/sim.hpp"

#include <cmath>

#include "doctest.h"
#include "moeplan/error.hpp"

using namespace moeplan;

namespace {

TraceRecord record_of(std::uint32_t iteration, std::uint32_t layer,
                      const RoutingMatrix& routing) {
  TraceRecord record;
  record.iteration = iteration;
  record.layer = layer;
  record.routing = routing;
  return record;
}

RoutingMatrix rows_of(int n_devices, const std::vector<TokenCount>& row) {
  RoutingMatrix r(n_devices, static_cast<int>(row.size()));
  for (int i = 0; i < n_devices; ++i)
    for (std::size_t j = 0; j < row.size(); ++j)
      r.at(i, static_cast<int>(j)) = row[j];
  return r;
}

const SimRecord& find_record(const SimReport& report, std::uint32_t iteration,
                             SchedulerKind kind) {
  for (const SimRecord& r : report.records)
    if (r.iteration == iteration && r.scheduler == kind) return r;
  throw std::logic_error("record not found");
}

}  // namespace

TEST_CASE("uniform routing makes every scheduler tie") {
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  std::vector<TraceRecord> trace;
  for (std::uint32_t t = 0; t < 4; ++t)
    trace.push_back(record_of(t, 0, rows_of(4, {25, 25, 25, 25})));
  const SchedulerKind all[] = {SchedulerKind::laer, SchedulerKind::static_ep,
                               SchedulerKind::even_replication};
  SimReport report = run_simulation(trace, topo, params, 1, all, search);
  for (std::uint32_t t = 0; t < 4; ++t) {
    double laer = find_record(report, t, SchedulerKind::laer).t_total;
    double fixed = find_record(report, t, SchedulerKind::static_ep).t_total;
    double even =
        find_record(report, t, SchedulerKind::even_replication).t_total;
    CHECK(laer == doctest::Approx(fixed).epsilon(1e-12));
    CHECK(laer == doctest::Approx(even).epsilon(1e-12));
  }
}

TEST_CASE("adaptive planning beats the static layout under persistent skew") {
  // Expert 0 takes half of all tokens; replication should halve the hot
  // device's compute from the first planned iteration onward.
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  std::vector<TraceRecord> trace;
  for (std::uint32_t t = 0; t < 5; ++t)
    trace.push_back(record_of(t, 0, rows_of(4, {50, 17, 17, 16})));
  const SchedulerKind both[] = {SchedulerKind::laer, SchedulerKind::static_ep};
  SimReport report = run_simulation(trace, topo, params, 2, both, search);
  for (std::uint32_t t = 1; t < 5; ++t) {
    CHECK(find_record(report, t, SchedulerKind::laer).t_comp <
          find_record(report, t, SchedulerKind::static_ep).t_comp);
  }
  CHECK(report.summary.at("laer").speedup_vs.at("static_ep") > 1.0);
}

TEST_CASE("self speedup is exactly one") {
  Topology topo(1, 2, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  std::vector<TraceRecord> trace{record_of(0, 0, rows_of(2, {3, 4}))};
  const SchedulerKind both[] = {SchedulerKind::laer, SchedulerKind::static_ep};
  SimReport report = run_simulation(trace, topo, params, 1, both, search);
  CHECK(report.summary.at("laer").speedup_vs.at("laer") == 1.0);
  CHECK(report.summary.at("static_ep").speedup_vs.at("static_ep") == 1.0);
}

TEST_CASE("a single hot expert drives the static balance ratio to N") {
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  std::vector<TraceRecord> trace{
      record_of(0, 0, rows_of(4, {40, 0, 0, 0}))};
  const SchedulerKind only[] = {SchedulerKind::static_ep};
  SimReport report = run_simulation(trace, topo, params, 1, only, search);
  const SimRecord& r = report.records.front();
  CHECK(r.max_recv_tokens == 160);
  CHECK(r.ideal_tokens == doctest::Approx(40.0));
  CHECK(static_cast<double>(r.max_recv_tokens) / r.ideal_tokens ==
        doctest::Approx(4.0));
}

TEST_CASE("max received tokens never drops below the rounded ideal") {
  TraceGenSpec spec{8, 8, 1, 10, 1000, 0.4, 0.2, 3};
  Topology topo(2, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  search.seed = 5;
  const SchedulerKind all[] = {SchedulerKind::laer, SchedulerKind::static_ep,
                               SchedulerKind::even_replication};
  SimReport report =
      run_simulation(generate_trace(spec), topo, params, 2, all, search);
  for (const SimRecord& r : report.records)
    CHECK(static_cast<double>(r.max_recv_tokens) >=
          std::ceil(r.ideal_tokens) - 1e-9);
}

TEST_CASE("tokens are conserved through the simulated pipeline") {
  TraceGenSpec spec{4, 6, 2, 6, 500, 0.5, 0.3, 8};
  auto trace = generate_trace(spec);
  Topology topo(2, 2, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  search.seed = 5;
  const SchedulerKind one[] = {SchedulerKind::laer};
  SimReport report = run_simulation(trace, topo, params, 2, one, search);
  // Every record's received tokens sum to the trace record's total.
  for (const SimRecord& r : report.records) {
    CHECK(r.ideal_tokens * 4 == doctest::Approx(500.0 * 4));
    CHECK(r.max_recv_tokens <= 4 * 500);
  }
}

TEST_CASE("the adaptive layout lags the routing by one iteration") {
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  RoutingMatrix steady = rows_of(4, {50, 17, 17, 16});
  RoutingMatrix sentinel = rows_of(4, {0, 0, 0, 100});

  std::vector<TraceRecord> base;
  for (std::uint32_t t = 0; t < 4; ++t)
    base.push_back(record_of(t, 0, steady));
  std::vector<TraceRecord> spiked = base;
  spiked[3].routing = sentinel;

  const SchedulerKind one[] = {SchedulerKind::laer};
  SimReport report_base = run_simulation(base, topo, params, 2, one, search);
  SimReport report_spiked =
      run_simulation(spiked, topo, params, 2, one, search);

  // Records before the spike are untouched.
  for (std::uint32_t t = 0; t < 3; ++t) {
    CHECK(find_record(report_base, t, SchedulerKind::laer).t_total ==
          find_record(report_spiked, t, SchedulerKind::laer).t_total);
  }
  // The spiked iteration still runs on the layout planned from the steady
  // history.
  std::vector<RoutingMatrix> history{steady, steady, steady};
  LayoutSearchSpec layer_search = search;
  layer_search.seed = mix_seed(search.seed, 0x6c617972, 0);
  ExpertLayout lagged = plan_layout(history, topo, params, 2, layer_search);
  double expected =
      time_cost(lite_routing(sentinel, lagged, topo), topo, params).t_total;
  CHECK(find_record(report_spiked, 3, SchedulerKind::laer).t_total ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("a drift-free trace yields a stationary adaptive plan") {
  TraceGenSpec spec{4, 4, 1, 6, 400, 0.4, 0.0, 19};
  auto trace = generate_trace(spec);
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  search.seed = 4;
  search.epsilon = 4;  // exercise the seeded perturbations too
  const SchedulerKind one[] = {SchedulerKind::laer};
  SimReport report = run_simulation(trace, topo, params, 2, one, search);
  const SimRecord& first_planned =
      find_record(report, 1, SchedulerKind::laer);
  for (std::uint32_t t = 2; t < 6; ++t) {
    const SimRecord& r = find_record(report, t, SchedulerKind::laer);
    CHECK(r.t_total == first_planned.t_total);
    CHECK(r.max_recv_tokens == first_planned.max_recv_tokens);
  }
}

TEST_CASE("the clairvoyant scheduler is at least as fast as the adaptive one "
          "on drifting input") {
  // tokens_per_device stays within the exact solver's per-cell unit bound.
  TraceGenSpec spec{4, 4, 1, 5, 20, 0.4, 0.6, 23};
  auto trace = generate_trace(spec);
  Topology topo(2, 2, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  search.seed = 2;
  OracleBudget budget;
  budget.max_token_granularity = 1;
  const SchedulerKind pair[] = {SchedulerKind::oracle_layout,
                                SchedulerKind::laer};
  SimReport report =
      run_simulation(trace, topo, params, 2, pair, search, budget);
  for (std::uint32_t t = 1; t < 5; ++t) {
    CHECK(find_record(report, t, SchedulerKind::oracle_layout).t_total <=
          find_record(report, t, SchedulerKind::laer).t_total * (1 + 1e-9));
  }
}

TEST_CASE("balance metrics summarize per-scheduler ratios") {
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  std::vector<TraceRecord> trace;
  for (std::uint32_t t = 0; t < 3; ++t)
    trace.push_back(record_of(t, 0, rows_of(4, {40, 0, 0, 0})));
  const SchedulerKind only[] = {SchedulerKind::static_ep};
  SimReport report = run_simulation(trace, topo, params, 1, only, search);
  auto metrics = balance_metrics(report);
  CHECK(metrics.at("static_ep").mean == doctest::Approx(4.0));
  CHECK(metrics.at("static_ep").p95 == doctest::Approx(4.0));
  CHECK_THROWS_AS(balance_metrics(SimReport{}), Error);
}

TEST_CASE("scalability_sweep rejects shapes the experts cannot fit") {
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  search.seed = 9;
  TraceGenSpec base{0, 8, 1, 3, 100, 0.4, 0.1, 5};
  const int too_small[] = {2};
  CHECK_THROWS_AS(scalability_sweep(base, 2, 1e9, 1e8, params, 2, too_small,
                                    search),
                  Error);
  const int uneven[] = {6};
  CHECK_THROWS_AS(scalability_sweep(base, 4, 1e9, 1e8, params, 2, uneven,
                                    search),
                  Error);
}

TEST_CASE("scalability_sweep speedup stays within the calibrated spread") {
  // Frozen from five-seed calibration runs at this setting: the largest
  // observed coefficient of variation was 0.071.
  CostParams params{8192.0, 3.52e8, 312e12, 0};
  LayoutSearchSpec search;
  search.seed = 99;
  const int counts[] = {8, 16, 32, 64};
  for (std::uint64_t seed : {11ull, 13ull, 15ull}) {
    TraceGenSpec base{0, 8, 1, 12, 2048, 0.4, 0.15, seed};
    auto rows =
        scalability_sweep(base, 8, 300e9, 25e9, params, 2, counts, search);
    REQUIRE(rows.size() == 4);
    double mean = 0.0;
    for (const SweepRow& row : rows) mean += row.speedup;
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const SweepRow& row : rows)
      var += (row.speedup - mean) * (row.speedup - mean);
    double cov = std::sqrt(var / static_cast<double>(rows.size())) / mean;
    CHECK(cov < 0.10);
  }
  const int counts_full[] = {8, 16};
  TraceGenSpec base{0, 8, 1, 3, 100, 0.4, 0.1, 5};
  std::string csv = sweep_to_csv(
      scalability_sweep(base, 8, 1e9, 1e8, params, 2, counts_full, search));
  CHECK(csv.find("n_devices,speedup\n8,") != std::string::npos);
}

TEST_CASE("run_simulation validates its inputs") {
  Topology topo(1, 4, 1e9, 1e8);
  CostParams params{8.0, 1e5, 1e12, 0};
  LayoutSearchSpec search;
  const SchedulerKind one[] = {SchedulerKind::laer};
  CHECK_THROWS_AS(run_simulation({}, topo, params, 1, one, search), Error);
  std::vector<TraceRecord> trace{record_of(0, 0, rows_of(2, {1, 1}))};
  CHECK_THROWS_AS(run_simulation(trace, topo, params, 1, one, search),
                  Error);  // topology has 4 devices, trace has 2
}

TEST_CASE("scheduler names round-trip") {
  for (SchedulerKind kind :
       {SchedulerKind::laer, SchedulerKind::static_ep,
        SchedulerKind::even_replication, SchedulerKind::oracle_layout})
    CHECK(scheduler_from_name(scheduler_name(kind)) == kind);
  CHECK_THROWS_AS(scheduler_from_name("nonsense"), Error);
}
