#include "ccrecon/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "ccrecon/errors.hpp"
#include "ccrecon/parallel.hpp"
#include "ccrecon/reconstruction.hpp"

namespace ccrecon {

namespace {

std::vector<NodePair> sorted_copy(std::span<const NodePair> edges) {
  std::vector<NodePair> out(edges.begin(), edges.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t intersection_size(std::span<const NodePair> recon, std::span<const NodePair> truth) {
  const auto a = sorted_copy(recon);
  const auto b = sorted_copy(truth);
  std::size_t count = 0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

Stat stat_of(const std::vector<double>& values) {
  Stat s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

}  // namespace

double recall(std::span<const NodePair> recon, std::span<const NodePair> truth) {
  const auto t = sorted_copy(truth);
  if (t.empty()) return 1.0;
  return static_cast<double>(intersection_size(recon, t)) / static_cast<double>(t.size());
}

double fpr(std::span<const NodePair> recon, std::span<const NodePair> truth, std::size_t n) {
  const auto t = sorted_copy(truth);
  const auto r = sorted_copy(recon);
  const std::size_t non_edges = pair_count(n) - t.size();
  if (non_edges == 0) throw DomainError("FPR undefined: ground truth is the complete graph");
  const std::size_t false_pos = r.size() - intersection_size(r, t);
  return static_cast<double>(false_pos) / static_cast<double>(non_edges);
}

double fpr_among_reconstructed(std::span<const NodePair> recon, std::span<const NodePair> truth) {
  const auto r = sorted_copy(recon);
  if (r.empty()) return 0.0;
  return static_cast<double>(r.size() - intersection_size(r, truth)) / static_cast<double>(r.size());
}

double precision(std::span<const NodePair> recon, std::span<const NodePair> truth) {
  const auto r = sorted_copy(recon);
  if (r.empty()) return 1.0;
  return static_cast<double>(intersection_size(r, truth)) / static_cast<double>(r.size());
}

LevelTally tally_levels(std::span<const NodeId> nodes, std::span<const Level> estimated,
                        std::span<const Level> truth) {
  if (nodes.size() != estimated.size()) throw DomainError("estimated levels do not match nodes");
  LevelTally tally;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= truth.size() || truth[nodes[k]] == kUnreached)
      throw DomainError("node " + std::to_string(nodes[k]) + " has no ground-truth level");
    tally.matched += estimated[k] == truth[nodes[k]] ? 1 : 0;
    ++tally.total;
  }
  return tally;
}

double node_level_recall(std::span<const NodeId> nodes, std::span<const Level> estimated,
                         std::span<const Level> truth) {
  return tally_levels(nodes, estimated, truth).fraction();
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman needs two equal series of length >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

GraphModelParams ExperimentConfig::params() const {
  if (p) return GraphModelParams::from_probability(n, *p);
  return GraphModelParams::from_mean_degree(n, mean_degree.value_or(0.0));
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError(name + ": n must be at least 2");
  if (p.has_value() == mean_degree.has_value())
    throw ConfigError(name + ": give exactly one of p and d_bar");
  if (p && !(*p >= 0.0 && *p <= 1.0)) throw ConfigError(name + ": p must lie in [0, 1]");
  if (mean_degree && !(*mean_degree >= 0.0 && *mean_degree <= static_cast<double>(n - 1)))
    throw ConfigError(name + ": d_bar must lie in [0, N-1]");
  if (checkpoints.empty()) throw ConfigError(name + ": need at least one cascade checkpoint");
  if (checkpoints.front() < 1) throw ConfigError(name + ": cascade count must be at least 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end())
    throw ConfigError(name + ": checkpoints must be strictly increasing");
  if (checkpoints.back() > n)
    throw ConfigError(name + ": more cascades than nodes (roots are drawn without replacement)");
  if (repeats < 1) throw ConfigError(name + ": repeats must be at least 1");
  if (!(hidden_fraction >= 0.0 && hidden_fraction < 1.0))
    throw ConfigError(name + ": hidden_fraction must lie in [0, 1)");
  if (max_level && *max_level < 1) throw ConfigError(name + ": max_level must be at least 1");
  if (weibull_instances < 1) throw ConfigError(name + ": weibull_instances must be at least 1");
  try {
    ccrecon::validate(edge_delay);
    if (observer_delay) ccrecon::validate(*observer_delay);
    if (inference_delay) ccrecon::validate(*inference_delay);
  } catch (const DomainError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

std::vector<std::size_t> every_cascade(std::size_t m) {
  std::vector<std::size_t> out(m);
  std::iota(out.begin(), out.end(), std::size_t{1});
  return out;
}

RepeatSeeds repeat_seeds(std::uint64_t master, std::size_t repeat) {
  return RepeatSeeds{derive_seed(master, {repeat, 0}), derive_seed(master, {repeat, 1}),
                     derive_seed(master, {repeat, 2}), derive_seed(master, {repeat, 3})};
}

const CheckpointSummary& RunResult::at(std::size_t cascades) const {
  for (const auto& s : summary)
    if (s.cascades == cascades) return s;
  throw DomainError("no checkpoint at " + std::to_string(cascades) + " cascades");
}

namespace {

struct CascadeOutcome {
  CascadeEvidence evidence;
  LevelTally raw;
  LevelTally corrected;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto params = config.params();
  RunResult result;
  result.experiment = config.name;
  result.config = config;
  result.weibull = fit_level_weibull(params, config.weibull_instances,
                                     config.weibull_roots.value_or(default_weibull_roots(config.n)),
                                     derive_seed(config.seed, {0x5eedULL}), config.graph);
  result.max_level = config.max_level.value_or(estimate_max_level(result.weibull, config.n));
  const TruncatedGamma delay(config.assumed_delay());
  const std::size_t total = config.cascades();
  const std::size_t threads = std::max<std::size_t>(1, config.threads);

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto seeds = repeat_seeds(config.seed, r);
    result.seeds.push_back(seeds);
    const Topology truth = config.graph == GraphKind::random_tree
                               ? generate_random_tree(config.n, config.edge_delay, seeds.graph)
                               : generate_er(params, config.edge_delay, seeds.graph);
    const auto roots = choose_roots(config.n, total, seeds.roots);
    std::vector<bool> hidden_nodes;
    if (config.hiding == HidingMode::fixed_nodes)
      hidden_nodes = choose_hidden_nodes(config.n, config.hidden_fraction, seeds.hiding);

    EdgeScoreTable table(config.n);
    LevelTally raw_tally;
    LevelTally corrected_tally;
    auto checkpoint = config.checkpoints.begin();

    for (std::size_t begin = 0; begin < total; begin += threads) {
      const std::size_t count = std::min(threads, total - begin);
      std::vector<CascadeOutcome> outcomes(count);
      parallel_for(count, threads, [&](std::size_t i) {
        const auto id = static_cast<CascadeId>(begin + i);
        const auto trace = propagate(truth, roots[begin + i], id);
        const std::uint64_t obs_seed = derive_seed(seeds.noise, {id});
        const Observation obs =
            config.hiding == HidingMode::fixed_nodes
                ? observe_excluding(trace, config.observer_delay, hidden_nodes, obs_seed)
                : observe(trace, ObservationModel{config.observer_delay, config.hidden_fraction}, obs_seed);
        auto& out = outcomes[i];
        if (obs.empty()) {
          out.evidence.weights.cascade_id = id;
          return;
        }
        out.evidence = analyze_cascade(obs, delay, result.max_level);
        const auto truth_levels = shortest_hop_levels(truth, roots[begin + i]);
        const auto& post = out.evidence.posterior;
        out.raw = tally_levels(post.nodes, map_levels(post), truth_levels);
        auto corrected = map_levels(post);
        try {
          const double gap = mean_centroid_gap(populated_centroids(obs, post));
          corrected = correct_gaps(obs, post, gap, result.weibull);
        } catch (const DomainError&) {
          // Fewer than two populated levels: nothing to correct against.
        }
        out.corrected = tally_levels(post.nodes, corrected, truth_levels);
      });

      for (std::size_t i = 0; i < count; ++i) {
        table.accumulate(outcomes[i].evidence.weights);
        raw_tally += outcomes[i].raw;
        corrected_tally += outcomes[i].corrected;
        result.fallback_nodes += outcomes[i].evidence.posterior.fallback_count();
        result.observed_nodes += outcomes[i].evidence.posterior.size();
        const std::size_t done = begin + i + 1;
        if (checkpoint != config.checkpoints.end() && *checkpoint == done) {
          const auto recon = select_edges(table, params);
          RepeatPoint pt;
          pt.repeat = r;
          pt.cascades = done;
          pt.recall = recall(recon.edges(), truth.edges());
          pt.fpr = pair_count(config.n) > truth.edge_count()
                       ? fpr(recon.edges(), truth.edges(), config.n)
                       : std::numeric_limits<double>::quiet_NaN();
          pt.fpr_alt = fpr_among_reconstructed(recon.edges(), truth.edges());
          pt.precision = precision(recon.edges(), truth.edges());
          pt.node_level_recall = raw_tally.fraction();
          pt.corrected_level_recall = corrected_tally.fraction();
          pt.reconstructed_edges = recon.edge_count();
          pt.pruned_pairs = table.pruned_count();
          result.points.push_back(pt);
          ++checkpoint;
        }
      }
    }
    result.level_tally += raw_tally;
    result.corrected_tally += corrected_tally;
  }

  for (std::size_t cascades : config.checkpoints) {
    std::vector<double> rec, fp, fpa, prec, nlr, clr;
    for (const auto& pt : result.points) {
      if (pt.cascades != cascades) continue;
      rec.push_back(pt.recall);
      fp.push_back(pt.fpr);
      fpa.push_back(pt.fpr_alt);
      prec.push_back(pt.precision);
      nlr.push_back(pt.node_level_recall);
      clr.push_back(pt.corrected_level_recall);
    }
    result.summary.push_back(CheckpointSummary{cascades, stat_of(rec), stat_of(fp), stat_of(fpa),
                                               stat_of(prec), stat_of(nlr), stat_of(clr)});
  }
  return result;
}

namespace {

ExperimentConfig base(std::string name, std::size_t n) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.n = n;
  c.threads = default_thread_count();
  return c;
}

std::string fixed(double v, int decimals) {
  std::string s = std::to_string(v);
  const auto dot = s.find('.');
  return dot == std::string::npos ? s : s.substr(0, dot + 1 + static_cast<std::size_t>(decimals));
}

std::vector<std::size_t> fraction_grid(std::size_t n, double max_fraction, std::size_t steps) {
  std::vector<std::size_t> out;
  for (std::size_t s = 1; s <= steps; ++s) {
    const auto m = static_cast<std::size_t>(
        std::llround(max_fraction * static_cast<double>(n) * static_cast<double>(s) / static_cast<double>(steps)));
    if (m >= 1 && (out.empty() || m > out.back())) out.push_back(m);
  }
  return out;
}

}  // namespace

std::vector<ExperimentConfig> preset_experiments(std::string_view name) {
  std::vector<ExperimentConfig> out;
  if (name == "smoke") {
    auto c = base("smoke", 200);
    c.mean_degree = 20.0;
    c.checkpoints = every_cascade(20);
    c.repeats = 1;
    out.push_back(c);
  } else if (name == "fig1") {
    // Reconstruction assumes a mis-estimated delay law; the simulation keeps the fitted one.
    for (const char* param : {"tau_max", "shape", "scale"}) {
      for (double factor : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        auto c = base(std::string("fig1-") + param + "-x" + fixed(factor, 1), 1000);
        c.p = 0.05;
        c.checkpoints = {10};
        c.repeats = 3;
        DelaySpec assumed = metu_git_delay();
        if (std::string_view(param) == "tau_max") assumed.tau_max *= factor;
        if (std::string_view(param) == "shape") assumed.shape *= factor;
        if (std::string_view(param) == "scale") assumed.scale *= factor;
        c.inference_delay = assumed;
        out.push_back(c);
      }
    }
  } else if (name == "fig2") {
    for (int i = 1; i <= 10; ++i) {
      auto c = base("fig2-p" + fixed(0.01 * i, 2), 1000);
      c.p = 0.01 * i;
      c.checkpoints = {10};
      c.repeats = 10;
      out.push_back(c);
    }
  } else if (name == "fig4" || name == "fig5") {
    auto c = base(std::string(name), 1000);
    c.p = 0.05;
    c.checkpoints = every_cascade(30);
    c.repeats = 10;
    out.push_back(c);
  } else if (name == "fig6") {
    for (std::size_t n : {500, 1000, 1500, 2000}) {
      auto c = base("fig6-n" + std::to_string(n), n);
      c.mean_degree = 50.0;
      c.checkpoints = fraction_grid(n, 0.1, 50);
      c.repeats = 1;
      out.push_back(c);
    }
  } else if (name == "fig7") {
    for (int d = 10; d <= 100; d += 10) {
      auto c = base("fig7-d" + std::to_string(d), 1000);
      c.mean_degree = d;
      c.checkpoints = fraction_grid(1000, 0.1, 20);
      c.repeats = 1;
      out.push_back(c);
    }
  } else if (name == "fig8") {
    for (int pct = 10; pct <= 50; pct += 5) {
      auto c = base("fig8-hidden" + std::to_string(pct), 1000);
      c.mean_degree = 50.0;
      c.hidden_fraction = pct / 100.0;
      c.checkpoints = fraction_grid(1000, 0.12, 24);
      c.repeats = 3;
      out.push_back(c);
    }
  } else if (name == "tree") {
    auto c = base("tree", 1000);
    c.graph = GraphKind::random_tree;
    c.mean_degree = 2.0 * 999.0 / 1000.0;
    c.checkpoints = fraction_grid(1000, 0.315, 63);
    c.repeats = 1;
    out.push_back(c);
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"smoke", "fig1", "fig2", "fig4", "fig5", "fig6", "fig7", "fig8", "tree"};
}

}  // namespace ccrecon
