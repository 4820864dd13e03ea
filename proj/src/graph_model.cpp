#include "ccrecon/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "ccrecon/errors.hpp"

namespace ccrecon {

NodePair make_pair(NodeId a, NodeId b) {
  if (a == b) throw DomainError("self-loop on node " + std::to_string(a));
  return a < b ? NodePair{a, b} : NodePair{b, a};
}

NodePair pair_at(std::size_t index, std::size_t n) {
  if (index >= pair_count(n)) throw DomainError("pair index out of range");
  // Row u holds n - u - 1 pairs.
  std::size_t u = 0;
  std::size_t row = n - 1;
  while (index >= row) {
    index -= row;
    ++u;
    --row;
  }
  return NodePair{static_cast<NodeId>(u), static_cast<NodeId>(u + 1 + index)};
}

double edge_probability(double mean_degree, std::size_t n) {
  if (n < 2) throw DomainError("edge probability needs N >= 2");
  const double max_degree = static_cast<double>(n - 1);
  if (!(mean_degree >= 0.0) || mean_degree > max_degree)
    throw DomainError("mean degree must lie in [0, N-1]");
  return mean_degree / max_degree;
}

GraphModelParams GraphModelParams::from_probability(std::size_t n, double p) {
  if (n < 2) throw DomainError("graph model needs N >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("edge probability must lie in [0, 1]");
  return GraphModelParams{n, p, p * static_cast<double>(n - 1)};
}

GraphModelParams GraphModelParams::from_mean_degree(std::size_t n, double mean_degree) {
  return GraphModelParams{n, edge_probability(mean_degree, n), mean_degree};
}

std::size_t GraphModelParams::expected_edges() const {
  return static_cast<std::size_t>(std::floor(p * static_cast<double>(pair_count(n)) + 0.5));
}

double degree_pmf(std::size_t d, const GraphModelParams& params) {
  if (params.n < 2 || d > params.n - 1) throw DomainError("degree out of range [0, N-1]");
  const double m = static_cast<double>(params.n - 1);
  const double k = static_cast<double>(d);
  const double p = params.p;
  if (p == 0.0) return d == 0 ? 1.0 : 0.0;
  if (p == 1.0) return d == params.n - 1 ? 1.0 : 0.0;
  const double log_choose = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (m - k) * std::log1p(-p));
}

Topology::Topology(std::size_t n, std::vector<NodePair> edges, std::vector<double> delays)
    : n_(n), edges_(std::move(edges)), delays_(std::move(delays)) {
  if (!delays_.empty() && delays_.size() != edges_.size())
    throw DomainError("topology needs one delay per edge");
  for (auto& e : edges_) {
    if (e.u >= n_ || e.v >= n_) throw DomainError("edge endpoint outside 0..N-1");
    e = make_pair(e.u, e.v);
  }
  if (!delays_.empty()) {
    std::vector<std::size_t> order(edges_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return edges_[a] < edges_[b]; });
    std::vector<NodePair> sorted_edges(edges_.size());
    std::vector<double> sorted_delays(edges_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted_edges[i] = edges_[order[i]];
      sorted_delays[i] = delays_[order[i]];
    }
    edges_ = std::move(sorted_edges);
    delays_ = std::move(sorted_delays);
  } else {
    std::sort(edges_.begin(), edges_.end());
  }
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw DomainError("duplicate edge in topology");

  offsets_.assign(n_ + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] += offsets_[v];
  adjacency_.resize(2 * edges_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const double d = delays_.empty() ? 0.0 : delays_[i];
    adjacency_[cursor[edges_[i].u]++] = Neighbor{edges_[i].v, d};
    adjacency_[cursor[edges_[i].v]++] = Neighbor{edges_[i].u, d};
  }
}

std::span<const Neighbor> Topology::neighbors(NodeId v) const {
  if (v >= n_) throw DomainError("node id outside 0..N-1");
  return std::span<const Neighbor>(adjacency_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

bool Topology::has_edge(NodeId a, NodeId b) const {
  if (a == b || a >= n_ || b >= n_) return false;
  return std::binary_search(edges_.begin(), edges_.end(), make_pair(a, b));
}

std::vector<NodePair> sample_er_edges(const GraphModelParams& params, Rng& rng) {
  std::vector<NodePair> edges;
  edges.reserve(params.expected_edges() + 16);
  const auto n = static_cast<NodeId>(params.n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < params.p) edges.push_back(NodePair{u, v});
  return edges;
}

Topology generate_er(const GraphModelParams& params, const DelaySpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  auto edges = sample_er_edges(params, rng);
  std::vector<double> delays(edges.size());
  for (auto& d : delays) d = sample_delay(spec, rng);
  return Topology(params.n, std::move(edges), std::move(delays));
}

std::vector<NodePair> sample_tree_edges(std::size_t n, Rng& rng) {
  std::vector<NodePair> edges;
  if (n < 2) return edges;
  if (n == 2) return {NodePair{0, 1}};
  std::vector<NodeId> code(n - 2);
  for (auto& c : code) c = static_cast<NodeId>(uniform_index(rng, n));
  std::vector<std::size_t> degree(n, 1);
  for (auto c : code) ++degree[c];
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> leaves;
  for (NodeId v = 0; v < n; ++v)
    if (degree[v] == 1) leaves.push(v);
  edges.reserve(n - 1);
  for (auto c : code) {
    const NodeId leaf = leaves.top();
    leaves.pop();
    edges.push_back(make_pair(leaf, c));
    if (--degree[c] == 1) leaves.push(c);
  }
  const NodeId a = leaves.top();
  leaves.pop();
  edges.push_back(make_pair(a, leaves.top()));
  return edges;
}

Topology generate_random_tree(std::size_t n, const DelaySpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  auto edges = sample_tree_edges(n, rng);
  std::vector<double> delays(edges.size());
  for (auto& d : delays) d = sample_delay(spec, rng);
  return Topology(n, std::move(edges), std::move(delays));
}

std::vector<Level> shortest_hop_levels(const Topology& topology, NodeId root) {
  if (root >= topology.node_count()) throw DomainError("root outside 0..N-1");
  std::vector<Level> level(topology.node_count(), kUnreached);
  std::vector<NodeId> frontier{root};
  level[root] = 1;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const NodeId v = frontier[head];
    for (const auto& nb : topology.neighbors(v)) {
      if (level[nb.node] == kUnreached) {
        level[nb.node] = level[v] + 1;
        frontier.push_back(nb.node);
      }
    }
  }
  return level;
}

}  // namespace ccrecon
