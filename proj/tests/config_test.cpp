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

#include "moeplan/commands.hpp"
#include "moeplan/config.hpp"

#include <string>

#include "doctest.h"
#include "moeplan/error.hpp"
#include "test_util.hpp"

using namespace moeplan;

namespace {

const char* kFullConfig = R"({
  "topology": {"n_nodes": 2, "devices_per_node": 4,
               "b_intra": 300e9, "b_inter": 25e9},
  "cost": {"v_comm": 8192, "v_comp": 3.52e8, "b_comp": 312e12, "f_ckpt": 0},
  "model": {"n_experts": 8, "capacity": 2,
            "p_fsep": 32, "p_ep": 4, "p_fsdp": 8,
            "hidden": 4096, "intermediate": 14336, "topk": 2,
            "psi_expert": 352321536, "psi_other": 134299648,
            "psi_all": 93.4e9, "bytes_per_element": 2},
  "planner": {"epsilon": 2, "seed": 7, "history": "last"}
})";

RunConfig full_config() { return parse_run_config(kFullConfig); }

std::vector<TraceRecord> small_trace(int iterations) {
  TraceGenSpec spec{8, 8, 1, iterations, 512, 0.3, 0.1, 21};
  return generate_trace(spec);
}

}  // namespace

TEST_CASE("parse_run_config reads every block") {
  RunConfig config = full_config();
  CHECK(config.require_topology().n_devices() == 8);
  CHECK(config.require_cost().v_comm == doctest::Approx(8192.0));
  CHECK(config.n_experts == 8);
  CHECK(config.capacity == 2);
  CHECK(config.analysis.p_fsep == 32);
  CHECK(config.search.epsilon == 2);
  CHECK(config.has_seed);
}

TEST_CASE("parse_run_config names missing and mistyped fields") {
  check_throws_containing(
      [] { parse_run_config(R"({"topology": {"n_nodes": 1}})"); },
      "devices_per_node");
  check_throws_containing(
      [] {
        parse_run_config(
            R"({"planner": {"seed": 1, "history": "sometimes"}})");
      },
      "history");
  check_throws_containing([] { parse_run_config("{oops"); }, "config");
}

TEST_CASE("commands demand the blocks they need") {
  RunConfig config = parse_run_config(R"({"model": {"n_experts": 2,
                                                    "capacity": 1}})");
  CHECK_THROWS_AS(config.require_topology(), Error);
  CHECK_THROWS_AS(config.require_cost(), Error);
  CHECK_THROWS_AS(config.require_seed(), Error);
}

TEST_CASE("gen specs require an explicit seed unless overridden") {
  const std::string spec = R"({"n_devices": 2, "n_experts": 2,
    "n_iterations": 1, "tokens_per_device": 10, "skew_alpha": 1.0})";
  check_throws_containing([&] { parse_gen_spec(spec); }, "seed");
  TraceGenSpec parsed = parse_gen_spec(spec, /*seed_required=*/false);
  CHECK(parsed.n_devices == 2);
}

TEST_CASE("instance parsing validates the matrix") {
  RoutingMatrix r = parse_instance(R"({"R": [[1, 2], [3, 4]]})");
  CHECK(r.n_devices() == 2);
  CHECK(r.at(1, 0) == 3);
  CHECK_THROWS_AS(parse_instance(R"({"R": [[1, 2], [3]]})"), Error);
  CHECK_THROWS_AS(parse_instance(R"({"R": [[1, -2]]})"), Error);
  CHECK_THROWS_AS(parse_instance(R"({})"), Error);
}

TEST_CASE("simulate artifacts are byte-identical across runs") {
  RunConfig config = full_config();
  auto trace = small_trace(5);
  auto schedulers = parse_scheduler_list("laer,static_ep,even_replication");
  auto first = simulate_artifacts(config, trace, schedulers);
  auto second = simulate_artifacts(config, trace, schedulers);
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
  CHECK(first.first.find("\"schedulers\":[\"laer\",\"static_ep\","
                         "\"even_replication\"]") != std::string::npos);
  CHECK(first.second.rfind("iter,layer,scheduler,t_comm,t_comp,t_total,"
                           "max_recv,ideal\n", 0) == 0);
}

TEST_CASE("scheduler lists reject duplicates and unknown names") {
  CHECK(parse_scheduler_list("laer").size() == 1);
  CHECK_THROWS_AS(parse_scheduler_list("laer,laer"), Error);
  CHECK_THROWS_AS(parse_scheduler_list("fastest"), Error);
  CHECK_THROWS_AS(parse_scheduler_list(""), Error);
}

TEST_CASE("plan on a one-iteration trace emits only the next layout") {
  RunConfig config = full_config();
  auto trace = small_trace(1);
  std::string json = plan_layer_json(config, trace, 0);
  CHECK(json.find("\"note\":\"iteration 0 runs on the scheduler's initial "
                  "layout") != std::string::npos);
  CHECK(json.find("{\"iteration\":1,") != std::string::npos);
  CHECK(json.find("{\"iteration\":0,") == std::string::npos);
  CHECK(json.find("\"routing_plan\":null") != std::string::npos);
}

TEST_CASE("plan covers observed iterations plus the next one") {
  RunConfig config = full_config();
  auto trace = small_trace(3);
  std::string json = plan_layer_json(config, trace, 0);
  for (int t = 1; t <= 3; ++t)
    CHECK(json.find("{\"iteration\":" + std::to_string(t) + ",") !=
          std::string::npos);
  // Evaluated plans exist for the observed iterations 1 and 2 only.
  CHECK(json.find("\"t_total\":") != std::string::npos);
  CHECK(json.find("\"routing_plan\":null") != std::string::npos);
  CHECK_THROWS_AS(plan_layer_json(config, trace, 9), Error);
}

TEST_CASE("analyze reports the reference ratio and threshold") {
  RunConfig config = full_config();
  std::string json = analyze_json(config);
  CHECK(json.find("\"ratio\":1.10714286") != std::string::npos);
  CHECK(json.find("\"min_tokens_per_device\":12480") != std::string::npos);
  CHECK(json.find("\"parameter_bytes\":") != std::string::npos);
}

TEST_CASE("analyze reports the undefined ratio case explicitly") {
  RunConfig config = parse_run_config(R"({
    "topology": {"n_nodes": 1, "devices_per_node": 4,
                 "b_intra": 1e9, "b_inter": 1e8},
    "cost": {"v_comm": 1, "v_comp": 1, "b_comp": 1},
    "model": {"n_experts": 4, "capacity": 1,
              "p_fsep": 4, "p_ep": 4, "p_fsdp": 1}
  })");
  std::string json = analyze_json(config);
  CHECK(json.find("p_fsdp = 1") != std::string::npos);
  CHECK(json.find("\"memory\":") != std::string::npos);
}

TEST_CASE("oracle gap report stays at or above one") {
  RunConfig config = parse_run_config(R"({
    "topology": {"n_nodes": 1, "devices_per_node": 4,
                 "b_intra": 100e9, "b_inter": 10e9},
    "cost": {"v_comm": 1000, "v_comp": 2e6, "b_comp": 1e12},
    "model": {"n_experts": 4, "capacity": 2},
    "planner": {"epsilon": 2, "seed": 3},
    "oracle": {"max_token_granularity": 1}
  })");
  RoutingMatrix instance = parse_instance(
      R"({"R": [[5,0,2,1],[1,4,0,3],[2,2,2,2],[0,0,7,1]]})");
  std::string json = oracle_gap_json(config, instance);
  CHECK(json.find("\"gap\":") != std::string::npos);
  CHECK(json.find("\"budget_exceeded\":false") != std::string::npos);
  auto pos = json.find("\"gap\":");
  double gap = std::stod(json.substr(pos + 6));
  CHECK(gap >= 1.0 - 1e-9);
}

TEST_CASE("stats include the zero-total flag") {
  TraceRecord zero;
  zero.routing = RoutingMatrix(2, 2);
  std::string json = stats_json({zero});
  CHECK(json.find("\"zero_total\":true") != std::string::npos);
}
