#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/delay_model.hpp"
#include "ccrecon/evaluation.hpp"
#include "ccrecon/graph_model.hpp"
#include "ccrecon/level_inference.hpp"
#include "ccrecon/reconstruction.hpp"

namespace ccrecon::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& doc);
void write_text(const fs::path& path, const std::string& text);

/// One-column CSV with header `delay_ms`. Blank lines are skipped.
std::vector<double> read_delay_samples(const fs::path& path);
std::vector<double> parse_delay_samples(std::istream& in, const std::string& source);

Json to_json(const DelaySpec& spec);
DelaySpec delay_spec_from_json(const Json& doc);
/// Either an inline object or a path (relative to base_dir) to a spec file.
DelaySpec delay_spec_from_value(const Json& value, const fs::path& base_dir);

/// {"n": N, "edges": [[i, j, delay_ms], ...]}; the delay column is dropped
/// for topologies without delays.
Json to_json(const Topology& topology);
Topology topology_from_json(const Json& doc);

void write_observation_csv(std::ostream& out, const Observation& obs);
void write_observation_csv(const fs::path& path, const Observation& obs);
/// All rows must carry the same cascade id.
Observation parse_observation_csv(std::istream& in, const std::string& source);
Observation read_observation_csv(const fs::path& path);

struct ManifestEntry {
  CascadeId cascade_id = 0;
  NodeId root = 0;
  std::string file;
};

struct Manifest {
  std::size_t n = 0;
  std::optional<double> p;
  std::optional<double> mean_degree;
  std::uint64_t seed = 0;
  double hidden_fraction = 0.0;
  HidingMode hiding = HidingMode::per_cascade;
  GraphKind graph = GraphKind::erdos_renyi;
  DelaySpec edge_delay;
  std::optional<DelaySpec> observer_delay;
  std::string topology_file;
  std::vector<ManifestEntry> cascades;

  GraphModelParams params() const;
};

Json to_json(const Manifest& manifest);
Manifest manifest_from_json(const Json& doc);
/// Loads every cascade file named in the manifest, resolved against base_dir.
std::vector<Observation> load_observations(const Manifest& manifest, const fs::path& base_dir);

void write_posterior_csv(std::ostream& out, std::span<const LevelPosterior> posteriors);
Json to_json(const WeibullFit& fit);

/// Rows for every pair seen together in at least one cascade.
void write_scores_csv(std::ostream& out, const EdgeScoreTable& table);

void write_results_header(std::ostream& out);
void write_results_rows(std::ostream& out, const RunResult& result);
Json summary_json(const RunResult& result);

Json to_json(const ExperimentConfig& config);
/// Applies the keys present in doc onto base. Unknown keys are rejected.
ExperimentConfig apply_config(const Json& doc, ExperimentConfig base, const fs::path& base_dir);

std::string graph_kind_name(GraphKind kind);
GraphKind parse_graph_kind(const std::string& name);
std::string hiding_mode_name(HidingMode mode);
HidingMode parse_hiding_mode(const std::string& name);

}  // namespace ccrecon::io
