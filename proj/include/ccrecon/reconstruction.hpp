#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/delay_model.hpp"
#include "ccrecon/graph_model.hpp"
#include "ccrecon/level_inference.hpp"

namespace ccrecon {

/// Weights below this are zero: truncation yields exact zeros, the threshold
/// only absorbs denormal underflow.
inline constexpr double kZeroWeight = 1e-300;

/// Edge evidence for the ordered pair (i, j) in one cascade:
///   sum_L P(l_i=L) P(l_j=L+1) p(t_j - t_i) + sum_L P(l_i=L) P(l_j=L-1) p(t_i - t_j).
/// Returns nullopt when either node is missing from the cascade.
std::optional<double> cascade_edge_weight(NodeId i, NodeId j, const Observation& obs,
                                          const LevelPosterior& posterior, const TruncatedGamma& delay);
std::optional<double> cascade_edge_weight(NodeId i, NodeId j, const Observation& obs,
                                          const LevelPosterior& posterior, const DelaySpec& spec);

struct PairWeight {
  NodePair pair;
  double forward = 0.0;   // w_{uv}
  double backward = 0.0;  // w_{vu}
};

/// Both orientations of the edge weight for every co-observed pair of one cascade.
struct CascadeWeights {
  CascadeId cascade_id = 0;
  std::vector<PairWeight> pairs;
};

CascadeWeights cascade_weights(const Observation& obs, const LevelPosterior& posterior,
                               const TruncatedGamma& delay);

/// Accumulated evidence W per unordered pair and the set of pruned pairs, over
/// a fixed node universe 0..N-1.
class EdgeScoreTable {
 public:
  explicit EdgeScoreTable(std::size_t n = 0);

  std::size_t node_count() const noexcept { return n_; }
  double weight(NodeId a, NodeId b) const { return weight_[pair_index(make_pair(a, b), n_)]; }
  bool pruned(NodeId a, NodeId b) const { return pruned_[pair_index(make_pair(a, b), n_)] != 0; }
  std::uint32_t evidence(NodeId a, NodeId b) const { return evidence_[pair_index(make_pair(a, b), n_)]; }
  std::size_t cascades() const noexcept { return cascades_; }
  std::size_t pruned_count() const;

  std::span<const double> weights() const noexcept { return weight_; }
  std::span<const std::uint8_t> pruned_flags() const noexcept { return pruned_; }

  /// A pair whose weight in this cascade is zero joins the pruned set for
  /// good; any other co-observed pair gets W += w_ij + w_ji. Pairs absent
  /// from the cascade are untouched.
  void accumulate(const CascadeWeights& weights);

  friend bool operator==(const EdgeScoreTable&, const EdgeScoreTable&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t cascades_ = 0;
  std::vector<double> weight_;
  std::vector<std::uint8_t> pruned_;
  std::vector<std::uint32_t> evidence_;  // cascades in which both endpoints were seen
};

/// Free-function form of EdgeScoreTable::accumulate.
EdgeScoreTable accumulate(EdgeScoreTable table, const CascadeWeights& weights);

/// The round(p N(N-1)/2) unpruned pairs with the largest positive W, ties by
/// pair id; fewer if fewer pairs carry positive weight. No delays.
Topology select_edges(const EdgeScoreTable& table, const GraphModelParams& params);

/// Posterior and pair weights of one cascade.
struct CascadeEvidence {
  LevelPosterior posterior;
  CascadeWeights weights;
};

CascadeEvidence analyze_cascade(const Observation& obs, const TruncatedGamma& delay, std::size_t max_level);

/// Analyzes cascades on up to `threads` workers. Output order matches input.
std::vector<CascadeEvidence> analyze_cascades(std::span<const Observation> observations,
                                              const TruncatedGamma& delay, std::size_t max_level,
                                              std::size_t threads);

struct ReconstructionOptions {
  /// Overrides the Weibull-derived maximum level.
  std::optional<std::size_t> max_level;
  std::size_t weibull_instances = 3;
  std::optional<std::size_t> weibull_roots;
  std::uint64_t weibull_seed = 1;
  std::size_t threads = 1;
};

struct Reconstruction {
  Topology topology;
  EdgeScoreTable table;
  std::size_t max_level = 0;
  std::optional<WeibullFit> weibull;  // absent when max_level was given
  std::size_t fallback_nodes = 0;
};

/// Max level from the random-graph Weibull unless overridden.
std::size_t resolve_max_level(const GraphModelParams& params, const ReconstructionOptions& options,
                              std::optional<WeibullFit>* fit_out = nullptr);

/// Level inference, pair weighting, accumulation with pruning and
/// top-k selection over all observations.
Reconstruction reconstruct(std::span<const Observation> observations, const GraphModelParams& params,
                           const DelaySpec& spec, const ReconstructionOptions& options = {});

}  // namespace ccrecon
