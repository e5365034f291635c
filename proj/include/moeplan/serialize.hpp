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

#ifndef MOEPLAN_SERIALIZE_HPP_
#define MOEPLAN_SERIALIZE_HPP_

#include <string>

#include "moeplan/types.hpp"

namespace moeplan {

struct SimReport;  // sim.hpp

// Fixed 9-significant-digit formatting so identical runs serialize to
// identical bytes.
std::string format_double(double value);

// E x N matrix of 0/1 entries. Validates the layout first.
std::string layout_to_json(const ExpertLayout& layout, int capacity);

// Sorted list of {"src","expert","dst","tokens"} objects. Validates the plan
// against its routing matrix and layout first.
std::string plan_to_json(const RoutingPlan& plan, const RoutingMatrix& routing,
                         const ExpertLayout& layout);

std::string report_to_json(const SimReport& report);
std::string report_to_csv(const SimReport& report);

}  // namespace moeplan

#endif  // MOEPLAN_SERIALIZE_HPP_
