#include "ccrecon/reconstruction.hpp"

#include <algorithm>
#include <string>

#include "ccrecon/errors.hpp"
#include "ccrecon/parallel.hpp"

namespace ccrecon {

namespace {

// Weights for the arrival positions (a, b): w_ab and w_ba share the same two
// level-overlap sums with the roles of the delay terms swapped.
struct DirectedWeights {
  double ab;
  double ba;
};

DirectedWeights pair_weights(const LevelPosterior& post, const Observation& obs, std::size_t a,
                             std::size_t b, const TruncatedGamma& delay) {
  const double ta = obs.arrivals[a].time_ms;
  const double tb = obs.arrivals[b].time_ms;
  const double d_ab = delay.pdf(tb - ta);  // b one level below a
  const double d_ba = delay.pdf(ta - tb);  // a one level below b
  if (d_ab == 0.0 && d_ba == 0.0) return {0.0, 0.0};
  const std::size_t levels = post.max_level;
  const double* pa = post.probs.data() + a * levels;
  const double* pb = post.probs.data() + b * levels;
  double up = 0.0;    // sum_L P_a(L) P_b(L+1)
  double down = 0.0;  // sum_L P_a(L) P_b(L-1)
  for (std::size_t col = 0; col + 1 < levels; ++col) {
    up += pa[col] * pb[col + 1];
    down += pa[col + 1] * pb[col];
  }
  return {up * d_ab + down * d_ba, down * d_ba + up * d_ab};
}

std::optional<std::size_t> position_of(const LevelPosterior& post, NodeId v) {
  const auto it = std::find(post.nodes.begin(), post.nodes.end(), v);
  if (it == post.nodes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - post.nodes.begin());
}

}  // namespace

std::optional<double> cascade_edge_weight(NodeId i, NodeId j, const Observation& obs,
                                          const LevelPosterior& posterior, const TruncatedGamma& delay) {
  if (obs.size() != posterior.size()) throw DomainError("posterior does not match observation");
  if (i == j) throw DomainError("edge weight of a self-pair");
  const auto a = position_of(posterior, i);
  const auto b = position_of(posterior, j);
  if (!a || !b) return std::nullopt;
  return pair_weights(posterior, obs, *a, *b, delay).ab;
}

std::optional<double> cascade_edge_weight(NodeId i, NodeId j, const Observation& obs,
                                          const LevelPosterior& posterior, const DelaySpec& spec) {
  return cascade_edge_weight(i, j, obs, posterior, TruncatedGamma(spec));
}

CascadeWeights cascade_weights(const Observation& obs, const LevelPosterior& posterior,
                               const TruncatedGamma& delay) {
  if (obs.size() != posterior.size()) throw DomainError("posterior does not match observation");
  CascadeWeights out{obs.cascade_id, {}};
  const std::size_t n = obs.size();
  out.pairs.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto w = pair_weights(posterior, obs, a, b, delay);
      const NodeId na = obs.arrivals[a].node;
      const NodeId nb = obs.arrivals[b].node;
      if (na < nb)
        out.pairs.push_back(PairWeight{NodePair{na, nb}, w.ab, w.ba});
      else
        out.pairs.push_back(PairWeight{NodePair{nb, na}, w.ba, w.ab});
    }
  }
  return out;
}

EdgeScoreTable::EdgeScoreTable(std::size_t n)
    : n_(n), weight_(pair_count(n), 0.0), pruned_(pair_count(n), 0), evidence_(pair_count(n), 0) {}

std::size_t EdgeScoreTable::pruned_count() const {
  return static_cast<std::size_t>(std::count(pruned_.begin(), pruned_.end(), std::uint8_t{1}));
}

void EdgeScoreTable::accumulate(const CascadeWeights& weights) {
  for (const auto& pw : weights.pairs) {
    if (pw.pair.v >= n_ || pw.pair.u >= pw.pair.v)
      throw DomainError("cascade pair outside the table's node universe");
    const std::size_t idx = pair_index(pw.pair, n_);
    ++evidence_[idx];
    if (pw.forward < kZeroWeight) {
      pruned_[idx] = 1;
    } else {
      weight_[idx] += pw.forward + pw.backward;
    }
  }
  ++cascades_;
}

EdgeScoreTable accumulate(EdgeScoreTable table, const CascadeWeights& weights) {
  table.accumulate(weights);
  return table;
}

Topology select_edges(const EdgeScoreTable& table, const GraphModelParams& params) {
  if (params.n != table.node_count()) throw DomainError("graph parameters and score table disagree on N");
  const std::size_t target = params.expected_edges();
  const auto weights = table.weights();
  const auto pruned = table.pruned_flags();
  std::vector<std::size_t> candidates;
  for (std::size_t idx = 0; idx < weights.size(); ++idx)
    if (!pruned[idx] && weights[idx] > 0.0) candidates.push_back(idx);
  // Row-major pair indices sort like (u, v), so the index is the lexicographic tie-break.
  auto better = [&](std::size_t a, std::size_t b) {
    return weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
  };
  if (candidates.size() > target) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(target),
                     candidates.end(), better);
    candidates.resize(target);
  }
  std::vector<NodePair> edges;
  edges.reserve(candidates.size());
  for (auto idx : candidates) edges.push_back(pair_at(idx, table.node_count()));
  return Topology(table.node_count(), std::move(edges));
}

CascadeEvidence analyze_cascade(const Observation& obs, const TruncatedGamma& delay, std::size_t max_level) {
  CascadeEvidence ev{infer_levels(obs, delay, max_level), {}};
  ev.weights = cascade_weights(obs, ev.posterior, delay);
  return ev;
}

std::vector<CascadeEvidence> analyze_cascades(std::span<const Observation> observations,
                                              const TruncatedGamma& delay, std::size_t max_level,
                                              std::size_t threads) {
  std::vector<CascadeEvidence> out(observations.size());
  parallel_for(observations.size(), threads,
               [&](std::size_t i) { out[i] = analyze_cascade(observations[i], delay, max_level); });
  return out;
}

std::size_t resolve_max_level(const GraphModelParams& params, const ReconstructionOptions& options,
                              std::optional<WeibullFit>* fit_out) {
  if (options.max_level) {
    if (*options.max_level < 1) throw DomainError("max_level must be at least 1");
    return *options.max_level;
  }
  const auto fit = fit_level_weibull(params, options.weibull_instances,
                                     options.weibull_roots.value_or(default_weibull_roots(params.n)),
                                     options.weibull_seed);
  if (fit_out) *fit_out = fit;
  return estimate_max_level(fit, params.n);
}

Reconstruction reconstruct(std::span<const Observation> observations, const GraphModelParams& params,
                           const DelaySpec& spec, const ReconstructionOptions& options) {
  if (observations.empty()) throw DomainError("reconstruction needs at least one observation");
  for (const auto& obs : observations)
    for (const auto& a : obs.arrivals)
      if (a.node >= params.n)
        throw DomainError("cascade " + std::to_string(obs.cascade_id) + " names node " +
                          std::to_string(a.node) + " outside 0..N-1");

  Reconstruction result;
  result.max_level = resolve_max_level(params, options, &result.weibull);
  const TruncatedGamma delay(spec);
  result.table = EdgeScoreTable(params.n);

  const std::size_t batch = std::max<std::size_t>(1, options.threads) * 2;
  for (std::size_t begin = 0; begin < observations.size(); begin += batch) {
    const auto chunk = observations.subspan(begin, std::min(batch, observations.size() - begin));
    for (const auto& ev : analyze_cascades(chunk, delay, result.max_level, options.threads)) {
      result.fallback_nodes += ev.posterior.fallback_count();
      result.table.accumulate(ev.weights);
    }
  }
  result.topology = select_edges(result.table, params);
  return result;
}

}  // namespace ccrecon
