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

#include "moeplan.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "moeplan/commands.hpp"
#include "moeplan/error.hpp"

extern "C" {

struct mp_trace {
  std::vector<moeplan::TraceRecord> records;
  std::vector<std::uint32_t> layers;
};

struct mp_config {
  moeplan::RunConfig rep;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error;

mp_status status_of(moeplan::ErrorKind kind) {
  switch (kind) {
    case moeplan::ErrorKind::invalid_argument: return MP_ERR_INVALID_ARGUMENT;
    case moeplan::ErrorKind::parse: return MP_ERR_PARSE;
    case moeplan::ErrorKind::io: return MP_ERR_IO;
    case moeplan::ErrorKind::infeasible: return MP_ERR_INFEASIBLE;
    case moeplan::ErrorKind::budget_exceeded: return MP_ERR_BUDGET_EXCEEDED;
    case moeplan::ErrorKind::internal: return MP_ERR_INTERNAL;
  }
  return MP_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes + last-error text.
template <typename Fn>
mp_status guarded(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return MP_OK;
  } catch (const moeplan::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MP_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void require_arg(bool ok, const char* what) {
  if (!ok)
    throw moeplan::Error(moeplan::ErrorKind::invalid_argument, what);
}

mp_trace* wrap_trace(std::vector<moeplan::TraceRecord> records) {
  auto* trace = new mp_trace{std::move(records), {}};
  trace->layers = moeplan::distinct_layers(trace->records);
  return trace;
}

}  // namespace

extern "C" {

const char* mp_status_name(mp_status status) {
  switch (status) {
    case MP_OK: return "ok";
    case MP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MP_ERR_PARSE: return "parse";
    case MP_ERR_IO: return "io";
    case MP_ERR_INFEASIBLE: return "infeasible";
    case MP_ERR_BUDGET_EXCEEDED: return "budget_exceeded";
    case MP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mp_last_error(void) { return g_last_error.c_str(); }

void mp_string_free(char* text) { std::free(text); }

mp_status mp_trace_generate(const char* spec_json,
                            const uint64_t* seed_override, mp_trace** out) {
  return guarded([&] {
    require_arg(spec_json != nullptr && out != nullptr,
                "mp_trace_generate: NULL argument");
    moeplan::TraceGenSpec spec = moeplan::parse_gen_spec(
        spec_json, /*seed_required=*/seed_override == nullptr);
    if (seed_override != nullptr) spec.seed = *seed_override;
    *out = wrap_trace(moeplan::generate_trace(spec));
  });
}

mp_status mp_trace_load(const char* path, mp_trace** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr,
                "mp_trace_load: NULL argument");
    *out = wrap_trace(moeplan::load_trace(path));
  });
}

mp_status mp_trace_save(const mp_trace* trace, const char* path) {
  return guarded([&] {
    require_arg(trace != nullptr && path != nullptr,
                "mp_trace_save: NULL argument");
    moeplan::save_trace(trace->records, path);
  });
}

mp_status mp_trace_dims(const mp_trace* trace, uint32_t* n_devices,
                        uint32_t* n_experts, uint32_t* n_records) {
  return guarded([&] {
    require_arg(trace != nullptr, "mp_trace_dims: NULL trace");
    uint32_t devices = 0;
    uint32_t experts = 0;
    if (!trace->records.empty()) {
      devices = static_cast<uint32_t>(trace->records.front().routing.n_devices());
      experts = static_cast<uint32_t>(trace->records.front().routing.n_experts());
    }
    if (n_devices != nullptr) *n_devices = devices;
    if (n_experts != nullptr) *n_experts = experts;
    if (n_records != nullptr)
      *n_records = static_cast<uint32_t>(trace->records.size());
  });
}

mp_status mp_trace_layer_count(const mp_trace* trace, uint32_t* count) {
  return guarded([&] {
    require_arg(trace != nullptr && count != nullptr,
                "mp_trace_layer_count: NULL argument");
    *count = static_cast<uint32_t>(trace->layers.size());
  });
}

mp_status mp_trace_layer_at(const mp_trace* trace, uint32_t index,
                            uint32_t* layer) {
  return guarded([&] {
    require_arg(trace != nullptr && layer != nullptr,
                "mp_trace_layer_at: NULL argument");
    require_arg(index < trace->layers.size(),
                "mp_trace_layer_at: index out of range");
    *layer = trace->layers[index];
  });
}

mp_status mp_trace_stats_json(const mp_trace* trace, char** out_json) {
  return guarded([&] {
    require_arg(trace != nullptr && out_json != nullptr,
                "mp_trace_stats_json: NULL argument");
    *out_json = copy_string(moeplan::stats_json(trace->records));
  });
}

void mp_trace_free(mp_trace* trace) { delete trace; }

mp_status mp_config_parse(const char* config_json, mp_config** out) {
  return guarded([&] {
    require_arg(config_json != nullptr && out != nullptr,
                "mp_config_parse: NULL argument");
    *out = new mp_config{moeplan::parse_run_config(config_json)};
  });
}

mp_status mp_config_load(const char* path, mp_config** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr,
                "mp_config_load: NULL argument");
    *out = new mp_config{moeplan::load_run_config(path)};
  });
}

mp_status mp_config_set_seed(mp_config* config, uint64_t seed) {
  return guarded([&] {
    require_arg(config != nullptr, "mp_config_set_seed: NULL config");
    config->rep.search.seed = seed;
    config->rep.has_seed = true;
  });
}

const char* mp_config_trace_path(const mp_config* config) {
  return config == nullptr ? "" : config->rep.trace_path.c_str();
}

const char* mp_config_out_path(const mp_config* config) {
  return config == nullptr ? "" : config->rep.out_path.c_str();
}

void mp_config_free(mp_config* config) { delete config; }

mp_status mp_plan_layer_json(const mp_config* config, const mp_trace* trace,
                             uint32_t layer, char** out_json) {
  return guarded([&] {
    require_arg(config != nullptr && trace != nullptr && out_json != nullptr,
                "mp_plan_layer_json: NULL argument");
    *out_json = copy_string(
        moeplan::plan_layer_json(config->rep, trace->records, layer));
  });
}

mp_status mp_simulate(const mp_config* config, const mp_trace* trace,
                      const char* schedulers_csv, char** out_report_json,
                      char** out_series_csv) {
  return guarded([&] {
    require_arg(config != nullptr && trace != nullptr &&
                    schedulers_csv != nullptr,
                "mp_simulate: NULL argument");
    auto [report, csv] = moeplan::simulate_artifacts(
        config->rep, trace->records,
        moeplan::parse_scheduler_list(schedulers_csv));
    if (out_report_json != nullptr) *out_report_json = copy_string(report);
    if (out_series_csv != nullptr) *out_series_csv = copy_string(csv);
  });
}

mp_status mp_analyze_json(const mp_config* config, char** out_json) {
  return guarded([&] {
    require_arg(config != nullptr && out_json != nullptr,
                "mp_analyze_json: NULL argument");
    *out_json = copy_string(moeplan::analyze_json(config->rep));
  });
}

mp_status mp_oracle_gap_json(const mp_config* config,
                             const char* instance_json, char** out_json) {
  return guarded([&] {
    require_arg(config != nullptr && instance_json != nullptr &&
                    out_json != nullptr,
                "mp_oracle_gap_json: NULL argument");
    *out_json = copy_string(moeplan::oracle_gap_json(
        config->rep, moeplan::parse_instance(instance_json)));
  });
}

}  // extern "C"
