#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "gossip/params.hpp"

namespace gossip {

// Age of an empty pool: larger than any age a node can hold.
inline constexpr std::uint64_t kInfiniteAge = std::numeric_limits<std::uint64_t>::max();

// What one user node currently stores: how many source versions behind its
// packet is, and whether the payload is accurate.
struct NodeState {
  std::uint64_t version_age = 0;
  bool truth = true;

  bool operator==(const NodeState&) const = default;
};

struct NetworkState {
  std::vector<NodeState> nodes;
  std::uint64_t source_version = 0;  // monotone counter, kept for logging

  // Start-of-time state: every node carries an accurate copy of version 0.
  static NetworkState fresh(int node_count) {
    NetworkState state;
    state.nodes.assign(static_cast<std::size_t>(node_count), NodeState{});
    return state;
  }

  int node_count() const { return static_cast<int>(nodes.size()); }

  bool operator==(const NetworkState&) const = default;
};

namespace detail {
inline void check_node(const NetworkState& state, int node) {
  if (node < 0 || node >= state.node_count()) {
    throw std::out_of_range("node index " + std::to_string(node) + " out of range");
  }
}
}  // namespace detail

// The source produced a new version: every node falls one version behind.
// Accuracy flags are untouched.
inline NetworkState apply_source_update(NetworkState state) {
  for (NodeState& node : state.nodes) ++node.version_age;
  ++state.source_version;
  return state;
}

// The source hands its current version to `receiver`. Source transmissions
// are always accurate, so the receiver ends up with a fresh truthful packet.
inline NetworkState apply_source_delivery(NetworkState state, int receiver) {
  detail::check_node(state, receiver);
  state.nodes[static_cast<std::size_t>(receiver)] = NodeState{0, true};
  return state;
}

// One gossip transmission from `sender` to `receiver`:
//   - a staler incoming packet is rejected outright;
//   - a fresher incoming packet replaces the receiver's, carrying the
//     sender's accuracy if the transmission was honest and none otherwise;
//   - on a version tie the receiver keeps its age, and the truth wins if
//     either copy carries it (a dishonest equal-age packet changes nothing,
//     the receiver has no reason to swap in an equally fresh packet it
//     cannot distinguish).
// The sender is never modified.
inline NetworkState apply_gossip(NetworkState state, int sender, int receiver, bool honest) {
  detail::check_node(state, sender);
  detail::check_node(state, receiver);
  if (sender == receiver) throw std::invalid_argument("gossip requires two distinct nodes");

  const NodeState& src = state.nodes[static_cast<std::size_t>(sender)];
  NodeState& dst = state.nodes[static_cast<std::size_t>(receiver)];
  if (src.version_age < dst.version_age) {
    dst.version_age = src.version_age;
    dst.truth = honest && src.truth;
  } else if (src.version_age == dst.version_age && honest && src.truth) {
    dst.truth = true;
  }
  return state;
}

// Fraction of nodes currently holding accurate information.
inline double truth_fraction(const NetworkState& state) {
  if (state.nodes.empty()) return 0.0;
  std::size_t count = 0;
  for (const NodeState& node : state.nodes) count += node.truth;
  return static_cast<double>(count) / static_cast<double>(state.nodes.size());
}

// Minimum version age over a pool of nodes; an empty pool has infinite age.
inline std::uint64_t min_age_over(const NetworkState& state, std::span<const int> pool) {
  std::uint64_t best = kInfiniteAge;
  for (int node : pool) {
    detail::check_node(state, node);
    best = std::min(best, state.nodes[static_cast<std::size_t>(node)].version_age);
  }
  return best;
}

// Pool the stored packets of `green` together with hypothetical corrupted
// copies of the packets of `orange` (same ages, accuracy forced to zero) and
// report whether some freshest packet of the pool is accurate. With an empty
// `green` every freshest packet is a corrupted copy, so the answer is no.
inline bool freshest_truth(const NetworkState& state,
                           std::span<const int> green,
                           std::span<const int> orange) {
  for (int g : green) {
    for (int o : orange) {
      if (g == o) throw std::invalid_argument("freshest_truth: pools must be disjoint");
    }
  }
  const std::uint64_t green_min = min_age_over(state, green);
  const std::uint64_t orange_min = min_age_over(state, orange);
  if (green_min > orange_min) return false;
  for (int node : green) {
    const NodeState& s = state.nodes[static_cast<std::size_t>(node)];
    if (s.version_age == green_min && s.truth) return true;
  }
  return false;
}

// True when some node of `pool` holds an accurate packet of the source's
// current version (age zero and truthful).
inline bool holds_fresh_truth(const NetworkState& state, std::span<const int> pool) {
  for (int node : pool) {
    detail::check_node(state, node);
    const NodeState& s = state.nodes[static_cast<std::size_t>(node)];
    if (s.version_age == 0 && s.truth) return true;
  }
  return false;
}

}  // namespace gossip
