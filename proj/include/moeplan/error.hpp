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

#ifndef MOEPLAN_ERROR_HPP_
#define MOEPLAN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace moeplan {

enum class ErrorKind {
  invalid_argument,  // bad parameter or precondition violation
  parse,             // malformed input text
  io,                // file open/read/write failure
  infeasible,        // problem shape admits no valid solution
  budget_exceeded,   // enumeration budget hit before completion
  internal,          // broken internal invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::budget_exceeded: return "budget_exceeded";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace moeplan

#endif  // MOEPLAN_ERROR_HPP_
