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

// Command-line front end. All computation goes through the C API in
// moeplan.h; this file only parses arguments and moves bytes between files
// and the library.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "moeplan.h"

namespace {

// Exit codes: 0 ok, 1 usage, otherwise 1 + mp_status of the failure.
int exit_code(mp_status status) { return 1 + static_cast<int>(status); }

[[noreturn]] void fail(mp_status status, const std::string& context) {
  std::cerr << "error (" << mp_status_name(status) << "): " << context;
  const char* detail = mp_last_error();
  if (detail != nullptr && detail[0] != '\0')
    std::cerr << ": " << detail;
  std::cerr << '\n';
  std::exit(exit_code(status));
}

void check(mp_status status, const std::string& context) {
  if (status != MP_OK) fail(status, context);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(MP_ERR_IO, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const char* text) {
  std::ofstream out(path);
  if (!out) fail(MP_ERR_IO, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(MP_ERR_IO, "failed writing " + path);
}

struct OwnedString {
  char* text = nullptr;
  ~OwnedString() { mp_string_free(text); }
};

struct OwnedTrace {
  mp_trace* trace = nullptr;
  ~OwnedTrace() { mp_trace_free(trace); }
};

struct OwnedConfig {
  mp_config* config = nullptr;
  ~OwnedConfig() { mp_config_free(config); }
};

OwnedConfig load_config(const std::string& path, bool has_seed,
                        std::uint64_t seed) {
  OwnedConfig config;
  check(mp_config_load(path.c_str(), &config.config),
        "loading config " + path);
  if (has_seed)
    check(mp_config_set_seed(config.config, seed), "applying --seed");
  return config;
}

OwnedTrace load_trace(const std::string& path) {
  OwnedTrace trace;
  check(mp_trace_load(path.c_str(), &trace.trace), "loading trace " + path);
  return trace;
}

// Command-line flags win over the config's paths block.
std::string resolve(const std::string& flag_value, const char* config_value,
                    const char* what) {
  if (!flag_value.empty()) return flag_value;
  if (config_value != nullptr && config_value[0] != '\0') return config_value;
  fail(MP_ERR_INVALID_ARGUMENT,
       std::string("no ") + what +
           " given; pass the flag or set it in the config's paths block");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expert-placement planner and trace-driven simulator for "
               "expert-parallel MoE training"};
  app.require_subcommand(1);

  std::string spec_path, config_path, trace_path, out_path, instance_path;
  std::string schedulers = "laer,static_ep,even_replication";
  std::uint64_t seed = 0;
  bool has_seed = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the configured seed")
        ->each([&](const std::string&) { has_seed = true; });
  };

  CLI::App* generate = app.add_subcommand(
      "generate-trace", "Synthesize a skewed, drifting routing trace");
  generate->add_option("--spec", spec_path, "Generator spec JSON file")
      ->required();
  generate->add_option("--out", out_path, "Output trace file")->required();
  add_seed(generate);

  CLI::App* plan = app.add_subcommand(
      "plan", "Write planned layouts and routing plans per layer");
  plan->add_option("--config", config_path, "Config JSON file")->required();
  plan->add_option("--trace", trace_path,
                   "Input trace file (default: config paths.trace)");
  plan->add_option("--out", out_path,
                   "Output directory (default: config paths.out)");
  add_seed(plan);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Replay a trace under the selected schedulers");
  simulate->add_option("--config", config_path, "Config JSON file")
      ->required();
  simulate->add_option("--trace", trace_path,
                       "Input trace file (default: config paths.trace)");
  simulate->add_option("--schedulers", schedulers,
                       "Comma-separated scheduler list");
  simulate->add_option("--out", out_path,
                       "Output directory (default: config paths.out)");
  add_seed(simulate);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Print communication-volume, memory and overlap analytics");
  analyze->add_option("--config", config_path, "Config JSON file")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Compare the greedy planner against the exact solver");
  oracle->add_option("--config", config_path, "Config JSON file")->required();
  oracle->add_option("--instance", instance_path, "Instance JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    std::string spec = read_file(spec_path);
    OwnedTrace trace;
    check(mp_trace_generate(spec.c_str(), has_seed ? &seed : nullptr,
                            &trace.trace),
          "generating trace");
    check(mp_trace_save(trace.trace, out_path.c_str()),
          "writing trace " + out_path);
    return 0;
  }

  if (plan->parsed()) {
    OwnedConfig config = load_config(config_path, has_seed, seed);
    OwnedTrace trace = load_trace(
        resolve(trace_path, mp_config_trace_path(config.config), "trace"));
    std::string out =
        resolve(out_path, mp_config_out_path(config.config), "output dir");
    std::filesystem::create_directories(out);
    uint32_t layer_count = 0;
    check(mp_trace_layer_count(trace.trace, &layer_count), "reading trace");
    for (uint32_t index = 0; index < layer_count; ++index) {
      uint32_t layer = 0;
      check(mp_trace_layer_at(trace.trace, index, &layer), "reading trace");
      OwnedString json;
      check(mp_plan_layer_json(config.config, trace.trace, layer, &json.text),
            "planning layer " + std::to_string(layer));
      write_file(out + "/plan_layer" + std::to_string(layer) + ".json",
                 json.text);
    }
    return 0;
  }

  if (simulate->parsed()) {
    OwnedConfig config = load_config(config_path, has_seed, seed);
    OwnedTrace trace = load_trace(
        resolve(trace_path, mp_config_trace_path(config.config), "trace"));
    std::string out =
        resolve(out_path, mp_config_out_path(config.config), "output dir");
    std::filesystem::create_directories(out);
    OwnedString report, csv;
    check(mp_simulate(config.config, trace.trace, schedulers.c_str(),
                      &report.text, &csv.text),
          "simulation");
    write_file(out + "/report.json", report.text);
    write_file(out + "/report.csv", csv.text);
    return 0;
  }

  if (analyze->parsed()) {
    OwnedConfig config = load_config(config_path, false, 0);
    OwnedString json;
    check(mp_analyze_json(config.config, &json.text), "analysis");
    std::cout << json.text;
    return 0;
  }

  if (oracle->parsed()) {
    OwnedConfig config = load_config(config_path, false, 0);
    std::string instance = read_file(instance_path);
    OwnedString json;
    check(mp_oracle_gap_json(config.config, instance.c_str(), &json.text),
          "oracle comparison");
    std::cout << json.text;
    return 0;
  }

  return 1;
}
