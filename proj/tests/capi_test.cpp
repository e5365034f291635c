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

// Exercises the shared-library surface the way an embedding client would:
// through moeplan.h only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>

#include "moeplan.h"

namespace {

const char* kSpec =
    R"({"n_devices": 4, "n_experts": 4, "n_layers": 2, "n_iterations": 3,
        "tokens_per_device": 64, "skew_alpha": 0.4, "drift_sigma": 0.1,
        "seed": 5})";

const char* kConfig = R"({
  "topology": {"n_nodes": 2, "devices_per_node": 2,
               "b_intra": 100e9, "b_inter": 10e9},
  "cost": {"v_comm": 1000, "v_comp": 2e6, "b_comp": 1e12},
  "model": {"n_experts": 4, "capacity": 2,
            "p_fsep": 8, "p_ep": 2, "p_fsdp": 4, "topk": 2,
            "psi_expert": 1e8},
  "planner": {"epsilon": 2, "seed": 11},
  "oracle": {"max_token_granularity": 1}
})";

struct Scoped {
  char* text = nullptr;
  ~Scoped() { mp_string_free(text); }
};

}  // namespace

TEST_CASE("trace generation, saving and loading round-trip") {
  mp_trace* trace = nullptr;
  REQUIRE(mp_trace_generate(kSpec, nullptr, &trace) == MP_OK);

  uint32_t devices = 0, experts = 0, records = 0;
  REQUIRE(mp_trace_dims(trace, &devices, &experts, &records) == MP_OK);
  CHECK(devices == 4);
  CHECK(experts == 4);
  CHECK(records == 6);

  uint32_t layer_count = 0;
  REQUIRE(mp_trace_layer_count(trace, &layer_count) == MP_OK);
  CHECK(layer_count == 2);
  uint32_t layer = 99;
  REQUIRE(mp_trace_layer_at(trace, 1, &layer) == MP_OK);
  CHECK(layer == 1);
  CHECK(mp_trace_layer_at(trace, 2, &layer) == MP_ERR_INVALID_ARGUMENT);

  const char* path = "capi_trace_tmp.jsonl";
  REQUIRE(mp_trace_save(trace, path) == MP_OK);
  mp_trace* loaded = nullptr;
  REQUIRE(mp_trace_load(path, &loaded) == MP_OK);
  uint32_t loaded_records = 0;
  REQUIRE(mp_trace_dims(loaded, nullptr, nullptr, &loaded_records) == MP_OK);
  CHECK(loaded_records == records);

  Scoped stats;
  REQUIRE(mp_trace_stats_json(loaded, &stats.text) == MP_OK);
  CHECK(std::string(stats.text).find("\"total_tokens\":256") !=
        std::string::npos);

  mp_trace_free(loaded);
  mp_trace_free(trace);
  std::remove(path);
}

TEST_CASE("seed override replaces a missing spec seed") {
  const char* no_seed =
      R"({"n_devices": 2, "n_experts": 2, "n_iterations": 1,
          "tokens_per_device": 16, "skew_alpha": 1.0})";
  mp_trace* trace = nullptr;
  CHECK(mp_trace_generate(no_seed, nullptr, &trace) ==
        MP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(mp_last_error()).find("seed") != std::string::npos);
  uint64_t seed = 9;
  REQUIRE(mp_trace_generate(no_seed, &seed, &trace) == MP_OK);
  mp_trace_free(trace);
}

TEST_CASE("simulate through the C API is deterministic") {
  mp_trace* trace = nullptr;
  REQUIRE(mp_trace_generate(kSpec, nullptr, &trace) == MP_OK);
  mp_config* config = nullptr;
  REQUIRE(mp_config_parse(kConfig, &config) == MP_OK);

  Scoped report1, csv1, report2, csv2;
  REQUIRE(mp_simulate(config, trace, "laer,static_ep", &report1.text,
                      &csv1.text) == MP_OK);
  REQUIRE(mp_simulate(config, trace, "laer,static_ep", &report2.text,
                      &csv2.text) == MP_OK);
  CHECK(std::string(report1.text) == report2.text);
  CHECK(std::string(csv1.text) == csv2.text);
  CHECK(std::string(report1.text).find("\"summary\"") != std::string::npos);

  CHECK(mp_simulate(config, trace, "warp_drive", &report1.text, nullptr) ==
        MP_ERR_INVALID_ARGUMENT);

  mp_config_free(config);
  mp_trace_free(trace);
}

TEST_CASE("planning through the C API responds to the seed setter") {
  mp_trace* trace = nullptr;
  REQUIRE(mp_trace_generate(kSpec, nullptr, &trace) == MP_OK);

  const char* no_seed_config = R"({
    "topology": {"n_nodes": 2, "devices_per_node": 2,
                 "b_intra": 100e9, "b_inter": 10e9},
    "cost": {"v_comm": 1000, "v_comp": 2e6, "b_comp": 1e12},
    "model": {"n_experts": 4, "capacity": 2},
    "planner": {"epsilon": 2}
  })";
  mp_config* config = nullptr;
  REQUIRE(mp_config_parse(no_seed_config, &config) == MP_OK);

  Scoped plan;
  CHECK(mp_plan_layer_json(config, trace, 0, &plan.text) ==
        MP_ERR_INVALID_ARGUMENT);  // no seed anywhere
  REQUIRE(mp_config_set_seed(config, 3) == MP_OK);
  REQUIRE(mp_plan_layer_json(config, trace, 0, &plan.text) == MP_OK);
  CHECK(std::string(plan.text).find("\"layout\":") != std::string::npos);

  mp_config_free(config);
  mp_trace_free(trace);
}

TEST_CASE("config path accessors expose the paths block") {
  mp_config* config = nullptr;
  REQUIRE(mp_config_parse(
              R"({"paths": {"trace": "in.jsonl", "out": "results"}})",
              &config) == MP_OK);
  CHECK(std::string(mp_config_trace_path(config)) == "in.jsonl");
  CHECK(std::string(mp_config_out_path(config)) == "results");
  mp_config_free(config);
  CHECK(std::string(mp_config_trace_path(nullptr)).empty());
}

TEST_CASE("analyze and oracle answer through the C API") {
  mp_config* config = nullptr;
  REQUIRE(mp_config_parse(kConfig, &config) == MP_OK);

  Scoped analysis;
  REQUIRE(mp_analyze_json(config, &analysis.text) == MP_OK);
  CHECK(std::string(analysis.text).find("\"comm_volume\"") !=
        std::string::npos);

  Scoped gap;
  REQUIRE(mp_oracle_gap_json(config, R"({"R": [[4,0,1,2],[0,3,1,0],
                                              [2,2,0,1],[1,0,3,2]]})",
                             &gap.text) == MP_OK);
  CHECK(std::string(gap.text).find("\"exact_cost\":") != std::string::npos);

  mp_config_free(config);
}

TEST_CASE("errors carry codes, names and messages") {
  CHECK(std::string(mp_status_name(MP_ERR_PARSE)) == "parse");
  CHECK(std::string(mp_status_name(MP_OK)) == "ok");

  mp_trace* trace = nullptr;
  CHECK(mp_trace_generate(nullptr, nullptr, &trace) ==
        MP_ERR_INVALID_ARGUMENT);
  CHECK(mp_trace_generate("{bad", nullptr, &trace) == MP_ERR_PARSE);
  CHECK(mp_trace_load("/nonexistent/trace.jsonl", &trace) == MP_ERR_IO);
  CHECK(std::string(mp_last_error()).find("trace") != std::string::npos);

  mp_config* config = nullptr;
  CHECK(mp_config_parse("]", &config) == MP_ERR_PARSE);
  CHECK(mp_config_set_seed(nullptr, 1) == MP_ERR_INVALID_ARGUMENT);

  // Infeasible shape: 9 experts on 2x2 slots.
  const char* tight = R"({
    "topology": {"n_nodes": 1, "devices_per_node": 2,
                 "b_intra": 1e9, "b_inter": 1e8},
    "cost": {"v_comm": 1, "v_comp": 1, "b_comp": 1},
    "model": {"n_experts": 9, "capacity": 2},
    "planner": {"seed": 1}
  })";
  REQUIRE(mp_config_parse(tight, &config) == MP_OK);
  mp_trace* small = nullptr;
  uint64_t seed = 1;
  REQUIRE(mp_trace_generate(
              R"({"n_devices": 2, "n_experts": 9, "n_iterations": 2,
                  "tokens_per_device": 32, "skew_alpha": 1.0})",
              &seed, &small) == MP_OK);
  Scoped out;
  CHECK(mp_simulate(config, small, "laer", &out.text, nullptr) ==
        MP_ERR_INFEASIBLE);
  mp_trace_free(small);
  mp_config_free(config);
}
