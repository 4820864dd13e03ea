#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/delay_model.hpp"
#include "ccrecon/graph_model.hpp"

namespace ccrecon {

/// Why a node was pinned to level 1.
enum class LevelOneRule : std::uint8_t {
  none,              // level follows from its predecessors
  first_arrival,     // nothing observed before it
  after_silence,     // gap to the immediately preceding arrival exceeds tau_max
  within_min_delay,  // every preceding arrival is less than tau_min earlier
};

/// Per-node probability of each level 1..max_level for one cascade. Rows follow
/// the observation order.
struct LevelPosterior {
  CascadeId cascade_id = 0;
  std::size_t max_level = 0;
  std::vector<NodeId> nodes;
  std::vector<double> probs;  // row-major, size() x max_level; column L-1 holds P(level = L)
  std::vector<LevelOneRule> level_one;
  /// Set where no predecessor could explain the arrival and the row fell back
  /// to uniform over 2..max_level.
  std::vector<std::uint8_t> fallback;

  std::size_t size() const noexcept { return nodes.size(); }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(probs).subspan(k * max_level, max_level);
  }
  double prob(std::size_t k, Level level) const {
    return level >= 1 && level <= max_level ? probs[k * max_level + level - 1] : 0.0;
  }
  std::size_t fallback_count() const;
};

/// Level posterior of every observed node. Nodes pinned by the level-one rules
/// get P(1) = 1; any other node k gets
///   P(l_k = L) proportional to sum_{i<k} P(l_i = L-1) * p_delay(t_k - t_i),
/// normalized over L = 2..max_level.
LevelPosterior infer_levels(const Observation& obs, const TruncatedGamma& delay, std::size_t max_level);
LevelPosterior infer_levels(const Observation& obs, const DelaySpec& spec, std::size_t max_level);

/// Most probable level per row; ties resolve to the smaller level.
std::vector<Level> map_levels(const LevelPosterior& posterior);

/// Probability-weighted mean observed time of each level. Levels carrying no
/// mass are absent.
std::map<Level, double> level_centroids(const Observation& obs, const LevelPosterior& posterior);

/// level_centroids restricted to levels that are the MAP level of at least one node.
std::map<Level, double> populated_centroids(const Observation& obs, const LevelPosterior& posterior);

/// Mean of T_L - T_{L-1} over consecutive levels that are both present.
/// Throws DomainError when no consecutive pair exists.
double mean_centroid_gap(const std::map<Level, double>& centroids);

struct WeibullFit {
  double shape = 0.0;
  double scale = 0.0;

  double cdf(double x) const;
  double pdf(double x) const;
};

using HopHistogram = std::map<std::uint32_t, std::uint64_t>;

/// Maximum-likelihood Weibull on positive integer values given as counts,
/// treating them as continuous observations. Throws FitError on fewer than 10
/// values or a point mass.
WeibullFit fit_weibull(const HopHistogram& histogram);

/// max_h |F_emp(h) - F_weibull(h + 1/2)| over integer h: KS distance with a
/// continuity correction for integer-valued data.
double discrete_ks_distance(const HopHistogram& histogram, const WeibullFit& fit);

/// Hop distance from each root to every other node it reaches.
HopHistogram hop_histogram(const Topology& topology, std::span<const NodeId> roots);

/// Pooled hop histogram behind fit_level_weibull.
HopHistogram level_hop_histogram(const GraphModelParams& params, std::size_t n_instances,
                                 std::size_t n_roots, std::uint64_t seed,
                                 GraphKind kind = GraphKind::erdos_renyi);

/// Hop-distance Weibull for the random-graph family: n_instances graphs, BFS
/// from n_roots random roots in each, one MLE fit over the pooled histogram.
WeibullFit fit_level_weibull(const GraphModelParams& params, std::size_t n_instances,
                             std::size_t n_roots, std::uint64_t seed,
                             GraphKind kind = GraphKind::erdos_renyi);

inline std::size_t default_weibull_roots(std::size_t n) { return n < 50 ? n : 50; }

/// Deepest level worth modelling: one more than the smallest hop count h with
/// F(h) >= 1 - 1/(10 N), never below 3.
std::size_t estimate_max_level(const WeibullFit& fit, std::size_t n);

/// Repairs MAP levels for unobserved levels. Each mid-sequence restart (a node
/// pinned to level 1 after a silence longer than tau_max) lifts the following
/// segment by the last level before the gap plus the number of mean_gap
/// intervals between the two bracketing centroids. If the deepest corrected
/// level still falls short of posterior.max_level, the whole cascade is shifted
/// by the amount that best matches the Weibull hop distribution.
std::vector<Level> correct_gaps(const Observation& obs, const LevelPosterior& posterior,
                                double mean_gap, const WeibullFit& weibull);

}  // namespace ccrecon
