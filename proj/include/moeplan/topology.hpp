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

#ifndef MOEPLAN_TOPOLOGY_HPP_
#define MOEPLAN_TOPOLOGY_HPP_

#include <limits>
#include <string>

#include "moeplan/error.hpp"

namespace moeplan {

// Two-tier device hierarchy: nodes of equal size, one intra-node and one
// inter-node bandwidth, both in bytes/second. Immutable after construction.
class Topology {
 public:
  Topology(int n_nodes, int devices_per_node, double b_intra, double b_inter)
      : n_nodes_(n_nodes),
        devices_per_node_(devices_per_node),
        b_intra_(b_intra),
        b_inter_(b_inter) {
    if (n_nodes <= 0 || devices_per_node <= 0)
      throw Error(ErrorKind::invalid_argument,
                  "topology: node and device counts must be positive");
    if (!(b_intra > 0.0) || !(b_inter > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "topology: bandwidths must be positive");
  }

  int n_nodes() const { return n_nodes_; }
  int devices_per_node() const { return devices_per_node_; }
  int n_devices() const { return n_nodes_ * devices_per_node_; }
  double b_intra() const { return b_intra_; }
  double b_inter() const { return b_inter_; }

  int node_of(int device) const {
    check_device(device);
    return device / devices_per_node_;
  }

  // Effective unidirectional bandwidth between two devices. A device talking
  // to itself performs no transfer, reported as infinite bandwidth.
  double link_bandwidth(int i, int k) const {
    check_device(i);
    check_device(k);
    if (i == k) return std::numeric_limits<double>::infinity();
    return i / devices_per_node_ == k / devices_per_node_ ? b_intra_
                                                          : b_inter_;
  }

 private:
  void check_device(int device) const {
    if (device < 0 || device >= n_devices())
      throw Error(ErrorKind::invalid_argument,
                  "topology: device index " + std::to_string(device) +
                      " out of range [0, " + std::to_string(n_devices()) +
                      ")");
  }

  int n_nodes_;
  int devices_per_node_;
  double b_intra_;
  double b_inter_;
};

}  // namespace moeplan

#endif  // MOEPLAN_TOPOLOGY_HPP_
