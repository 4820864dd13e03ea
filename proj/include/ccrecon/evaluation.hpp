#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/delay_model.hpp"
#include "ccrecon/graph_model.hpp"
#include "ccrecon/level_inference.hpp"

namespace ccrecon {

/// |recon & truth| / |truth|; 1 when truth is empty.
double recall(std::span<const NodePair> recon, std::span<const NodePair> truth);

/// False positives over true non-edges, |recon \ truth| / (C(N,2) - |truth|).
/// Throws DomainError when truth is the complete graph.
double fpr(std::span<const NodePair> recon, std::span<const NodePair> truth, std::size_t n);

/// False positives over reconstructed edges, |recon \ truth| / |recon|; 0 for an empty recon.
double fpr_among_reconstructed(std::span<const NodePair> recon, std::span<const NodePair> truth);

double precision(std::span<const NodePair> recon, std::span<const NodePair> truth);

struct LevelTally {
  std::size_t matched = 0;
  std::size_t total = 0;

  LevelTally& operator+=(const LevelTally& o) {
    matched += o.matched;
    total += o.total;
    return *this;
  }
  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(total); }
};

/// Compares estimated levels (parallel to `nodes`) with ground-truth levels
/// indexed by node id. Every node must be reached in the truth.
LevelTally tally_levels(std::span<const NodeId> nodes, std::span<const Level> estimated,
                        std::span<const Level> truth);

double node_level_recall(std::span<const NodeId> nodes, std::span<const Level> estimated,
                         std::span<const Level> truth);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

enum class HidingMode { per_cascade, fixed_nodes };

struct ExperimentConfig {
  std::string name = "custom";
  std::size_t n = 1000;
  /// Exactly one of p and mean_degree is set.
  std::optional<double> p;
  std::optional<double> mean_degree;
  GraphKind graph = GraphKind::erdos_renyi;
  DelaySpec edge_delay = metu_git_delay();
  /// Observer offset law; nullopt records true receipt times.
  std::optional<DelaySpec> observer_delay = metu_git_delay();
  /// Delay law assumed by the reconstruction; defaults to edge_delay.
  std::optional<DelaySpec> inference_delay;
  /// Cascade counts at which the graph is reconstructed and scored, ascending.
  std::vector<std::size_t> checkpoints{22};
  double hidden_fraction = 0.0;
  HidingMode hiding = HidingMode::per_cascade;
  std::size_t repeats = 10;
  std::uint64_t seed = 1;
  std::optional<std::size_t> max_level;
  std::size_t weibull_instances = 3;
  std::optional<std::size_t> weibull_roots;
  std::size_t threads = 1;

  GraphModelParams params() const;
  const DelaySpec& assumed_delay() const { return inference_delay ? *inference_delay : edge_delay; }
  std::size_t cascades() const { return checkpoints.empty() ? 0 : checkpoints.back(); }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Checkpoints 1, 2, ..., m.
std::vector<std::size_t> every_cascade(std::size_t m);

struct RepeatPoint {
  std::size_t repeat = 0;
  std::size_t cascades = 0;
  double recall = 0.0;
  double fpr = 0.0;
  double fpr_alt = 0.0;
  double precision = 0.0;
  /// MAP levels against BFS truth, pooled over this repeat's cascades so far.
  double node_level_recall = 0.0;
  /// Same after gap correction.
  double corrected_level_recall = 0.0;
  std::size_t reconstructed_edges = 0;
  std::size_t pruned_pairs = 0;
};

struct Stat {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct CheckpointSummary {
  std::size_t cascades = 0;
  Stat recall;
  Stat fpr;
  Stat fpr_alt;
  Stat precision;
  Stat node_level_recall;
  Stat corrected_level_recall;
};

struct RepeatSeeds {
  std::uint64_t graph;
  std::uint64_t roots;
  std::uint64_t noise;
  std::uint64_t hiding;
};

/// Stream seeds of one repeat, derived from the master seed.
RepeatSeeds repeat_seeds(std::uint64_t master, std::size_t repeat);

struct RunResult {
  std::string experiment;
  ExperimentConfig config;
  std::size_t max_level = 0;
  WeibullFit weibull;
  std::vector<RepeatPoint> points;  // repeat-major, then checkpoint order
  std::vector<CheckpointSummary> summary;
  std::vector<RepeatSeeds> seeds;
  std::size_t fallback_nodes = 0;
  std::size_t observed_nodes = 0;
  /// MAP and gap-corrected level matches pooled over every cascade of every repeat.
  LevelTally level_tally;
  LevelTally corrected_tally;

  const CheckpointSummary& at(std::size_t cascades) const;
};

/// For each repeat: fresh graph and cascades, incremental reconstruction
/// scored at every checkpoint. Deterministic in the config, including across
/// thread counts.
RunResult run_experiment(const ExperimentConfig& config);

/// Named experiment sets reproducing the evaluation figures (fig1 ... fig8,
/// tree, smoke).
std::vector<ExperimentConfig> preset_experiments(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace ccrecon
