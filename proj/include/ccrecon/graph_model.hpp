#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccrecon/delay_model.hpp"

namespace ccrecon {

using NodeId = std::uint32_t;

/// Unordered node pair stored with u < v.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

/// Orders the endpoints; throws DomainError on a self-loop.
NodePair make_pair(NodeId a, NodeId b);

inline std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Row-major index of (u, v), u < v, in the strict upper triangle of an n x n matrix.
inline std::size_t pair_index(NodePair p, std::size_t n) {
  const std::size_t u = p.u;
  return u * (2 * n - u - 1) / 2 + (p.v - u - 1);
}

NodePair pair_at(std::size_t index, std::size_t n);

/// Erdos-Renyi parameters. p and mean_degree always satisfy p = d / (N - 1).
struct GraphModelParams {
  std::size_t n = 0;
  double p = 0.0;
  double mean_degree = 0.0;

  static GraphModelParams from_probability(std::size_t n, double p);
  static GraphModelParams from_mean_degree(std::size_t n, double mean_degree);

  /// round-half-up of p * N(N-1)/2.
  std::size_t expected_edges() const;
};

double edge_probability(double mean_degree, std::size_t n);

/// Binomial(N-1, p) probability of degree d, evaluated in log space.
double degree_pmf(std::size_t d, const GraphModelParams& params);

struct Neighbor {
  NodeId node;
  double delay_ms;
};

/// Undirected overlay: nodes 0..N-1, canonical (sorted) edge list and, for
/// simulated ground truth, one delay per edge. Immutable after construction.
class Topology {
 public:
  Topology() = default;
  /// `delays` is either empty (structure only) or parallel to `edges`.
  /// Edges are canonicalized; duplicates, self-loops and out-of-range ids throw.
  Topology(std::size_t n, std::vector<NodePair> edges, std::vector<double> delays = {});

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const NodePair> edges() const noexcept { return edges_; }
  bool has_delays() const noexcept { return !delays_.empty(); }
  std::span<const double> delays() const noexcept { return delays_; }
  std::span<const Neighbor> neighbors(NodeId v) const;
  bool has_edge(NodeId a, NodeId b) const;

 private:
  std::size_t n_ = 0;
  std::vector<NodePair> edges_;
  std::vector<double> delays_;
  std::vector<std::size_t> offsets_;  // CSR adjacency
  std::vector<Neighbor> adjacency_;
};

/// Includes each of the N(N-1)/2 pairs independently with probability p,
/// visiting pairs in (u, v) lexicographic order.
std::vector<NodePair> sample_er_edges(const GraphModelParams& params, Rng& rng);

/// Erdos-Renyi overlay with an independent truncated-Gamma delay per edge.
Topology generate_er(const GraphModelParams& params, const DelaySpec& spec, std::uint64_t seed);

/// Uniform random labelled tree (Pruefer decoding): connected, N-1 edges, no cycles.
std::vector<NodePair> sample_tree_edges(std::size_t n, Rng& rng);
Topology generate_random_tree(std::size_t n, const DelaySpec& spec, std::uint64_t seed);

enum class GraphKind { erdos_renyi, random_tree };

using Level = std::uint32_t;
inline constexpr Level kUnreached = 0;

/// Breadth-first hop distance plus one, so the root sits at level 1 and its
/// neighbours at level 2. Unreachable nodes get kUnreached.
std::vector<Level> shortest_hop_levels(const Topology& topology, NodeId root);

}  // namespace ccrecon
