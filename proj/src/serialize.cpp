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

#include "moeplan/serialize.hpp"

#include <cstdio>
#include <sstream>

#include "moeplan/sim.hpp"

namespace moeplan {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

std::string layout_to_json(const ExpertLayout& layout, int capacity) {
  validate_layout(layout, capacity);
  std::ostringstream out;
  out << '[';
  for (int j = 0; j < layout.n_experts(); ++j) {
    if (j > 0) out << ',';
    out << '[';
    for (int i = 0; i < layout.n_devices(); ++i) {
      if (i > 0) out << ',';
      out << (layout.hosts(j, i) ? 1 : 0);
    }
    out << ']';
  }
  out << ']';
  return out.str();
}

std::string plan_to_json(const RoutingPlan& plan, const RoutingMatrix& routing,
                         const ExpertLayout& layout) {
  validate_plan(plan, routing, layout);
  std::ostringstream out;
  out << '[';
  for (std::size_t k = 0; k < plan.entries.size(); ++k) {
    const PlanEntry& e = plan.entries[k];
    if (k > 0) out << ',';
    out << "{\"src\":" << e.src << ",\"expert\":" << e.expert
        << ",\"dst\":" << e.dst << ",\"tokens\":" << e.tokens << '}';
  }
  out << ']';
  return out.str();
}

std::string report_to_json(const SimReport& report) {
  std::ostringstream out;
  out << "{\n\"n_devices\":" << report.n_devices
      << ",\n\"n_experts\":" << report.n_experts << ",\n\"schedulers\":[";
  for (std::size_t s = 0; s < report.schedulers.size(); ++s) {
    if (s > 0) out << ',';
    out << '"' << scheduler_name(report.schedulers[s]) << '"';
  }
  out << "],\n\"summary\":{";
  for (std::size_t s = 0; s < report.schedulers.size(); ++s) {
    const char* name = scheduler_name(report.schedulers[s]);
    const SchedulerSummary& summary = report.summary.at(name);
    if (s > 0) out << ',';
    out << "\n\"" << name << "\":{\"mean_iteration_time\":"
        << format_double(summary.mean_iteration_time)
        << ",\"mean_balance_ratio\":"
        << format_double(summary.mean_balance_ratio) << ",\"speedup_vs\":{";
    for (std::size_t o = 0; o < report.schedulers.size(); ++o) {
      const char* other = scheduler_name(report.schedulers[o]);
      if (o > 0) out << ',';
      out << '"' << other
          << "\":" << format_double(summary.speedup_vs.at(other));
    }
    out << "}}";
  }
  out << "},\n\"records\":[";
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    const SimRecord& r = report.records[k];
    if (k > 0) out << ',';
    out << "\n{\"iter\":" << r.iteration << ",\"layer\":" << r.layer
        << ",\"scheduler\":\"" << scheduler_name(r.scheduler)
        << "\",\"t_comm\":" << format_double(r.t_comm)
        << ",\"t_comp\":" << format_double(r.t_comp)
        << ",\"t_total\":" << format_double(r.t_total)
        << ",\"max_recv\":" << r.max_recv_tokens
        << ",\"ideal\":" << format_double(r.ideal_tokens) << '}';
  }
  out << "\n]\n}\n";
  return out.str();
}

std::string report_to_csv(const SimReport& report) {
  std::ostringstream out;
  out << "iter,layer,scheduler,t_comm,t_comp,t_total,max_recv,ideal\n";
  for (const SimRecord& r : report.records)
    out << r.iteration << ',' << r.layer << ','
        << scheduler_name(r.scheduler) << ',' << format_double(r.t_comm)
        << ',' << format_double(r.t_comp) << ',' << format_double(r.t_total)
        << ',' << r.max_recv_tokens << ',' << format_double(r.ideal_tokens)
        << '\n';
  return out.str();
}

}  // namespace moeplan
