/* Copyright 2026 The Moeplan Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the moeplan planning and simulation core.
 *
 * Handles are opaque and owned by the caller once returned; release them
 * with the matching *_free function. Functions return MP_OK on success and
 * an error code otherwise; mp_last_error() describes the most recent failure
 * on the calling thread. Strings produced by the library are heap-allocated
 * and must be released with mp_string_free.
 */

#ifndef MOEPLAN_H_
#define MOEPLAN_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mp_status {
  MP_OK = 0,
  MP_ERR_INVALID_ARGUMENT = 1,
  MP_ERR_PARSE = 2,
  MP_ERR_IO = 3,
  MP_ERR_INFEASIBLE = 4,
  MP_ERR_BUDGET_EXCEEDED = 5,
  MP_ERR_INTERNAL = 6,
} mp_status;

typedef struct mp_trace mp_trace;
typedef struct mp_config mp_config;

const char* mp_status_name(mp_status status);

/* Message for the last failure on this thread; empty string if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char* mp_last_error(void);

void mp_string_free(char* text);

/* ---- traces ---------------------------------------------------------- */

/* spec_json fields: n_devices, n_experts, n_layers, n_iterations,
 * tokens_per_device, skew_alpha, drift_sigma, seed. A non-NULL
 * seed_override replaces the spec's seed (and makes it optional). */
mp_status mp_trace_generate(const char* spec_json,
                            const uint64_t* seed_override, mp_trace** out);

mp_status mp_trace_load(const char* path, mp_trace** out);
mp_status mp_trace_save(const mp_trace* trace, const char* path);

mp_status mp_trace_dims(const mp_trace* trace, uint32_t* n_devices,
                        uint32_t* n_experts, uint32_t* n_records);
mp_status mp_trace_layer_count(const mp_trace* trace, uint32_t* count);
mp_status mp_trace_layer_at(const mp_trace* trace, uint32_t index,
                            uint32_t* layer);

/* Per-(iteration, layer) totals, expert loads and shares. */
mp_status mp_trace_stats_json(const mp_trace* trace, char** out_json);

void mp_trace_free(mp_trace* trace);

/* ---- configuration --------------------------------------------------- */

mp_status mp_config_parse(const char* config_json, mp_config** out);
mp_status mp_config_load(const char* path, mp_config** out);
mp_status mp_config_set_seed(mp_config* config, uint64_t seed);

/* Paths from the config's optional "paths" block; empty strings when unset.
 * The returned pointers stay valid until mp_config_free. */
const char* mp_config_trace_path(const mp_config* config);
const char* mp_config_out_path(const mp_config* config);

void mp_config_free(mp_config* config);

/* ---- commands --------------------------------------------------------- */

/* Planned layouts and routing plans for one layer of the trace. */
mp_status mp_plan_layer_json(const mp_config* config, const mp_trace* trace,
                             uint32_t layer, char** out_json);

/* schedulers_csv example: "laer,static_ep,even_replication". Either output
 * pointer may be NULL when that artifact is not wanted. */
mp_status mp_simulate(const mp_config* config, const mp_trace* trace,
                      const char* schedulers_csv, char** out_report_json,
                      char** out_series_csv);

/* Communication-volume ratio, memory footprint, overlap threshold. */
mp_status mp_analyze_json(const mp_config* config, char** out_json);

/* instance_json: {"R": [[...]]}. Compares the greedy planner against the
 * exact solver on the instance. */
mp_status mp_oracle_gap_json(const mp_config* config,
                             const char* instance_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* MOEPLAN_H_ */
