// Multi-channel RTS/CTS/RES slot engine.
//
// A slot runs in three ordered phases: every transmitter senses its chosen
// channel, transmitters that found their channel idle run the control-channel
// handshake in backoff order, and granted pairs transmit for the rest of the
// slot. Node ids: the transmitter of pair m is 2m, its receiver is 2m + 1.
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crmac/core_model.hpp"
#include "crmac/fading.hpp"
#include "crmac/policies.hpp"
#include "crmac/rng.hpp"

namespace crmac {

using NodeId = std::size_t;

constexpr NodeId tx_node(std::size_t pair) { return 2 * pair; }
constexpr NodeId rx_node(std::size_t pair) { return 2 * pair + 1; }
constexpr std::size_t pair_of(NodeId node) { return node / 2; }

/// Symmetric adjacency over the 2M secondary nodes.
class NeighborGraph {
 public:
  NeighborGraph() = default;

  /// Every node hears every other node.
  static NeighborGraph complete(std::size_t pairs) {
    NeighborGraph g(pairs);
    for (NodeId a = 0; a < g.num_nodes(); ++a) {
      for (NodeId b = 0; b < g.num_nodes(); ++b) {
        if (a != b) g.adj_[a * g.num_nodes() + b] = 1;
      }
    }
    return g;
  }

  static NeighborGraph from_edges(std::size_t pairs,
                                  std::span<const std::pair<NodeId, NodeId>> edges) {
    NeighborGraph g(pairs);
    for (auto [a, b] : edges) g.add_edge(a, b);
    return g;
  }

  explicit NeighborGraph(std::size_t pairs)
      : pairs_(pairs), adj_(4 * pairs * pairs, 0) {}

  void add_edge(NodeId a, NodeId b) {
    if (a >= num_nodes() || b >= num_nodes()) throw std::out_of_range("edge node out of range");
    if (a == b) throw std::invalid_argument("self-edges are not allowed");
    adj_[a * num_nodes() + b] = 1;
    adj_[b * num_nodes() + a] = 1;
  }

  bool adjacent(NodeId a, NodeId b) const { return adj_[a * num_nodes() + b] != 0; }

  std::vector<NodeId> neighbors(NodeId a) const {
    std::vector<NodeId> out;
    for (NodeId b = 0; b < num_nodes(); ++b) {
      if (adjacent(a, b)) out.push_back(b);
    }
    return out;
  }

  std::size_t num_pairs() const { return pairs_; }
  std::size_t num_nodes() const { return 2 * pairs_; }

 private:
  std::size_t pairs_ = 0;
  std::vector<unsigned char> adj_;
};

enum class NodeRole { transmitter, receiver };

struct Reservation {
  NodeId node = 0;
  NodeRole role = NodeRole::transmitter;
  std::size_t channel = 0;
  std::size_t valid_until = 0;  ///< last slot (inclusive) the entry is active

  friend auto operator<=>(const Reservation&, const Reservation&) = default;
};

/// What a node has overheard about its neighbors' reservations this slot.
class NeighborDatabase {
 public:
  /// Inserts an entry; a second entry for the same (node, channel) is ignored.
  void insert(const Reservation& r) {
    for (const auto& e : entries_) {
      if (e.node == r.node && e.channel == r.channel) return;
    }
    entries_.push_back(r);
  }

  /// First active entry with the given role on `channel`, if any.
  std::optional<Reservation> find(NodeRole role, std::size_t channel, std::size_t slot) const {
    for (const auto& e : entries_) {
      if (e.role == role && e.channel == channel && e.valid_until >= slot) return e;
    }
    return std::nullopt;
  }

  void expire(std::size_t slot) {
    std::erase_if(entries_, [slot](const Reservation& e) { return e.valid_until <= slot; });
  }

  bool empty() const { return entries_.empty(); }
  std::span<const Reservation> entries() const { return entries_; }

 private:
  std::vector<Reservation> entries_;
};

using Databases = std::vector<NeighborDatabase>;

enum class Verdict { transmitted, slept_busy, blocked_by_database, lost_contention };

/// Per-pair record of one slot.
struct SlotOutcome {
  std::size_t chosen_channel = 0;
  ChannelState sensed = ChannelState::busy;
  Verdict verdict = Verdict::slept_busy;
  double reward = 0.0;

  friend bool operator==(const SlotOutcome&, const SlotOutcome&) = default;
};

/// Contending pairs sorted by their backoff draws.
struct ContentionOrder {
  std::vector<std::size_t> pairs;
  std::vector<double> backoffs;
};

/// Orders contenders by i.i.d. uniform backoffs, one draw per contender in the
/// given order. Exactly equal draws are re-drawn for the tied contenders.
inline ContentionOrder contention_order(std::span<const std::size_t> contenders, Rng& rng) {
  ContentionOrder order;
  order.pairs.assign(contenders.begin(), contenders.end());
  order.backoffs.resize(contenders.size());
  for (auto& b : order.backoffs) b = rng.uniform();

  bool tied = true;
  while (tied) {
    tied = false;
    std::vector<std::size_t> idx(order.backoffs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return order.backoffs[a] < order.backoffs[b]; });
    for (std::size_t k = 1; k < idx.size(); ++k) {
      if (order.backoffs[idx[k]] == order.backoffs[idx[k - 1]]) {
        order.backoffs[idx[k]] = rng.uniform();
        tied = true;
      }
    }
  }

  std::vector<std::size_t> idx(order.pairs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return order.backoffs[a] < order.backoffs[b]; });
  ContentionOrder sorted;
  for (std::size_t i : idx) {
    sorted.pairs.push_back(order.pairs[i]);
    sorted.backoffs.push_back(order.backoffs[i]);
  }
  return sorted;
}

enum class HandshakeStatus { granted, blocked_at_tx, blocked_at_rx };

struct HandshakeResult {
  HandshakeStatus status = HandshakeStatus::granted;
  /// Pair whose reservation caused the block.
  std::optional<std::size_t> blocker;
};

/// RTS/CTS/RES exchange of one pair on `channel`.
///
/// The transmitter refuses to send RTS if it knows of an active receiver on
/// the channel; the receiver refuses CTS if it knows of an active transmitter.
/// On success the CTS is overheard by the receiver's neighbors and the RES by
/// the transmitter's neighbors.
inline HandshakeResult handshake(std::size_t pair, std::size_t channel, Databases& dbs,
                                 const NeighborGraph& graph, std::size_t slot = 0) {
  const NodeId tx = tx_node(pair);
  const NodeId rx = rx_node(pair);
  if (auto e = dbs[tx].find(NodeRole::receiver, channel, slot)) {
    return {HandshakeStatus::blocked_at_tx, pair_of(e->node)};
  }
  if (auto e = dbs[rx].find(NodeRole::transmitter, channel, slot)) {
    return {HandshakeStatus::blocked_at_rx, pair_of(e->node)};
  }
  for (NodeId nb = 0; nb < graph.num_nodes(); ++nb) {
    if (graph.adjacent(rx, nb)) dbs[nb].insert({rx, NodeRole::receiver, channel, slot});
  }
  for (NodeId nb = 0; nb < graph.num_nodes(); ++nb) {
    if (graph.adjacent(tx, nb)) dbs[nb].insert({tx, NodeRole::transmitter, channel, slot});
  }
  return {HandshakeStatus::granted, std::nullopt};
}

struct SlotResult {
  std::vector<SlotOutcome> outcomes;
  std::vector<BeliefState> beliefs;  ///< beliefs for the next slot
};

/// Everything a slot needs besides the per-pair beliefs and random streams.
struct SlotEnvironment {
  const PuNetworkState& pu;
  const SnrBlock& snr;
  PolicyKind policy;
  const ChannelBandwidths& bandwidths;
  const NeighborGraph& graph;
  std::size_t slot = 0;
};

/// Runs one slot.
///
/// Channel selection draws come from `policy_rng` in pair order; backoff draws
/// come from `mac_rng`. `dbs` must be empty on entry and is empty on return.
inline SlotResult run_slot(const SlotEnvironment& env, std::span<const BeliefState> beliefs,
                           Databases& dbs, Rng& policy_rng, Rng& mac_rng) {
  const std::size_t pairs = beliefs.size();
  const std::size_t channels = env.pu.num_channels();
  if (env.snr.num_pairs() != pairs || env.snr.num_channels() != channels ||
      env.graph.num_pairs() != pairs || env.bandwidths.size() != channels) {
    throw std::invalid_argument("slot inputs have inconsistent dimensions");
  }
  if (dbs.size() != env.graph.num_nodes()) dbs.assign(env.graph.num_nodes(), NeighborDatabase{});
  for (const auto& db : dbs) {
    if (!db.empty()) throw std::logic_error("neighbor databases must be empty at slot start");
  }

  SlotResult result;
  result.outcomes.resize(pairs);
  result.beliefs.reserve(pairs);

  // Sensing. Beliefs depend only on what was sensed.
  std::vector<std::size_t> contenders;
  for (std::size_t m = 0; m < pairs; ++m) {
    auto& out = result.outcomes[m];
    if (beliefs[m].size() != channels) throw std::invalid_argument("belief length mismatch");
    out.chosen_channel =
        select_channel(env.policy, beliefs[m], env.snr.row(m), env.bandwidths, policy_rng);
    out.sensed = env.pu.states[out.chosen_channel];
    result.beliefs.push_back(
        update_belief(beliefs[m], SenseResult{out.chosen_channel, out.sensed}, env.pu.matrices));
    if (out.sensed == ChannelState::idle) {
      contenders.push_back(m);
    } else {
      out.verdict = Verdict::slept_busy;
    }
  }

  // Control-channel contention.
  if (!contenders.empty()) {
    const ContentionOrder order = contention_order(contenders, mac_rng);
    for (std::size_t m : order.pairs) {
      auto& out = result.outcomes[m];
      const HandshakeResult hs = handshake(m, out.chosen_channel, dbs, env.graph, env.slot);
      if (hs.status == HandshakeStatus::granted) {
        out.verdict = Verdict::transmitted;
      } else {
        // Losing to a pair whose transmitter shares our contention domain is a
        // contention loss; a block learned only through a third node is not.
        const bool rivals = env.graph.adjacent(tx_node(m), tx_node(*hs.blocker));
        out.verdict = rivals ? Verdict::lost_contention : Verdict::blocked_by_database;
      }
    }
  }

  // Data.
  for (std::size_t m = 0; m < pairs; ++m) {
    auto& out = result.outcomes[m];
    if (out.verdict != Verdict::transmitted) continue;
    if (!env.pu.is_idle(out.chosen_channel)) {
      throw std::logic_error("secondary transmission on a PU-busy channel");
    }
    const std::size_t n = out.chosen_channel;
    out.reward = capacity(env.snr.at(m, n), env.bandwidths[n]);
  }

  for (auto& db : dbs) db.expire(env.slot);
  return result;
}

/// Convenience overload with slot-local databases.
inline SlotResult run_slot(const SlotEnvironment& env, std::span<const BeliefState> beliefs,
                           Rng& policy_rng, Rng& mac_rng) {
  Databases dbs(env.graph.num_nodes());
  return run_slot(env, beliefs, dbs, policy_rng, mac_rng);
}

}  // namespace crmac
