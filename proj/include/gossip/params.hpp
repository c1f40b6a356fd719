#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace gossip {

// Parameters of a fully connected network of user nodes attached to a single
// always-accurate source. All rates are Poisson intensities per unit time.
//
// The source generates new versions at `source_update_rate` and pushes its
// current version into the network at total rate `delivery_rate`, picking the
// destination uniformly. Each user node gossips at total rate `gossip_rate`,
// split evenly over its n-1 peers; a node-to-node transmission corrupts the
// payload with probability `mutation_prob`.
struct NetworkParams {
  int node_count = 1;
  double source_update_rate = 0.0;
  double delivery_rate = 0.0;
  double gossip_rate = 0.0;
  double mutation_prob = 0.0;

  // Rate at which the source contacts one specific node.
  double per_node_delivery_rate() const {
    return delivery_rate / node_count;
  }

  // Rate of one ordered gossip link. A single-node network has no links.
  double pair_gossip_rate() const {
    return node_count >= 2 ? gossip_rate / (node_count - 1) : 0.0;
  }

  // Superposed intensity of every event process in the system.
  double total_event_rate() const {
    double rate = source_update_rate + delivery_rate;
    if (node_count >= 2) rate += node_count * gossip_rate;
    return rate;
  }
};

inline void validate(const NetworkParams& params) {
  auto bad = [](const std::string& what) { throw std::invalid_argument("NetworkParams: " + what); };
  if (params.node_count < 1) bad("node_count must be >= 1");
  for (double rate : {params.source_update_rate, params.delivery_rate, params.gossip_rate}) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) bad("rates must be finite and >= 0");
  }
  if (!(params.mutation_prob >= 0.0 && params.mutation_prob <= 1.0)) {
    bad("mutation_prob must lie in [0, 1]");
  }
  if (params.source_update_rate == 0.0 && params.delivery_rate == 0.0 && params.gossip_rate == 0.0) {
    bad("at least one rate must be positive");
  }
}

}  // namespace gossip
