#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ccrecon/delay_model.hpp"
#include "ccrecon/graph_model.hpp"

namespace ccrecon {

using CascadeId = std::uint32_t;

inline constexpr double kNeverReceived = std::numeric_limits<double>::infinity();

/// True first-receipt times of one cascade. first_receipt[v] is kNeverReceived
/// for nodes outside the root's component.
struct CascadeTrace {
  CascadeId cascade_id = 0;
  NodeId root = 0;
  std::vector<double> first_receipt;

  bool reached(NodeId v) const { return first_receipt.at(v) != kNeverReceived; }
  std::size_t reached_count() const;
};

struct Arrival {
  NodeId node = 0;
  double time_ms = 0.0;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

/// What an outside observer records for one cascade: arrivals sorted by
/// observed time (ties by node id), each node at most once.
struct Observation {
  CascadeId cascade_id = 0;
  std::vector<Arrival> arrivals;

  std::size_t size() const noexcept { return arrivals.size(); }
  bool empty() const noexcept { return arrivals.empty(); }
};

/// Throws DomainError if arrivals are unsorted or repeat a node.
void validate(const Observation& obs);

/// Sorts arrivals into canonical (time, node) order.
void canonicalize(Observation& obs);

/// Flooding with immediate forwarding and zero processing delay: each node's
/// first receipt is its shortest-delay distance from the root (Dijkstra).
CascadeTrace propagate(const Topology& topology, NodeId root, CascadeId cascade_id);

struct ObservationModel {
  /// Observer offset law; nullopt records true receipt times.
  std::optional<DelaySpec> observer_delay;
  /// floor(fraction * reached) arrivals are dropped uniformly at random.
  double hidden_fraction = 0.0;
};

/// Adds an independent observer offset to every reached node, then hides a
/// random subset. The seed fixes both the offsets and the hidden subset.
Observation observe(const CascadeTrace& trace, const ObservationModel& model, std::uint64_t seed);

inline Observation observe(const CascadeTrace& trace, const DelaySpec& spec,
                           double hidden_fraction, std::uint64_t seed) {
  return observe(trace, ObservationModel{spec, hidden_fraction}, seed);
}

/// Variant where the same nodes are invisible in every cascade: nodes with
/// hidden[v] set are dropped, everything else gets an observer offset.
Observation observe_excluding(const CascadeTrace& trace, const std::optional<DelaySpec>& observer_delay,
                              const std::vector<bool>& hidden, std::uint64_t seed);

/// floor(fraction * n) distinct nodes, as a membership mask.
std::vector<bool> choose_hidden_nodes(std::size_t n, double fraction, std::uint64_t seed);

/// `count` distinct roots drawn uniformly without replacement.
std::vector<NodeId> choose_roots(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace ccrecon
