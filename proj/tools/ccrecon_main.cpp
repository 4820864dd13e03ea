#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/delay_model.hpp"
#include "ccrecon/errors.hpp"
#include "ccrecon/evaluation.hpp"
#include "ccrecon/graph_model.hpp"
#include "ccrecon/io.hpp"
#include "ccrecon/level_inference.hpp"
#include "ccrecon/parallel.hpp"
#include "ccrecon/reconstruction.hpp"

namespace {

using namespace ccrecon;
namespace fs = std::filesystem;
using io::Json;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::optional<std::size_t> threads;
  std::string preset;
  std::optional<std::size_t> max_level;
};

struct SimFlags {
  std::optional<std::size_t> n;
  std::optional<double> p;
  std::optional<double> d_bar;
  std::optional<std::size_t> cascades;
  std::optional<double> hidden_fraction;
  std::optional<std::size_t> repeats;
};

ExperimentConfig load_config(const Globals& g, const SimFlags& f) {
  ExperimentConfig c;
  c.threads = default_thread_count();
  if (!g.preset.empty()) {
    auto presets = preset_experiments(g.preset);
    if (presets.size() != 1)
      throw ConfigError("preset '" + g.preset + "' holds " + std::to_string(presets.size()) +
                        " experiments; only 'evaluate' runs multi-experiment presets");
    c = presets.front();
  }
  if (!g.config.empty()) {
    const fs::path path(g.config);
    c = io::apply_config(io::read_json(path), c, path.parent_path());
  }
  if (f.n) c.n = *f.n;
  if (f.p) {
    c.p = *f.p;
    c.mean_degree.reset();
  }
  if (f.d_bar) {
    c.mean_degree = *f.d_bar;
    c.p.reset();
  }
  if (f.cascades) c.checkpoints = {*f.cascades};
  if (f.hidden_fraction) c.hidden_fraction = *f.hidden_fraction;
  if (f.repeats) c.repeats = *f.repeats;
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = *g.threads;
  if (g.max_level) c.max_level = *g.max_level;
  c.validate();
  return c;
}

fs::path output_dir(const Globals& g) { return g.output_dir.empty() ? fs::path(".") : fs::path(g.output_dir); }

int cmd_fit_delay(const Globals& g, const std::string& samples, const std::string& out) {
  const auto values = io::read_delay_samples(samples);
  const auto spec = fit_gamma(values);
  const std::string text = io::to_json(spec).dump(2) + "\n";
  if (!out.empty()) {
    io::write_text(out, text);
  } else if (!g.output_dir.empty()) {
    io::write_text(output_dir(g) / "delay_spec.json", text);
  } else {
    std::cout << text;
  }
  return 0;
}

int cmd_simulate(const Globals& g, const SimFlags& f) {
  const auto config = load_config(g, f);
  const auto dir = output_dir(g);
  const auto params = config.params();
  const auto seeds = repeat_seeds(config.seed, 0);
  const Topology truth = config.graph == GraphKind::random_tree
                             ? generate_random_tree(config.n, config.edge_delay, seeds.graph)
                             : generate_er(params, config.edge_delay, seeds.graph);
  const auto roots = choose_roots(config.n, config.cascades(), seeds.roots);
  std::vector<bool> hidden;
  if (config.hiding == HidingMode::fixed_nodes)
    hidden = choose_hidden_nodes(config.n, config.hidden_fraction, seeds.hiding);

  io::Manifest m;
  m.n = config.n;
  m.p = config.p;
  m.mean_degree = config.mean_degree;
  m.seed = config.seed;
  m.hidden_fraction = config.hidden_fraction;
  m.hiding = config.hiding;
  m.graph = config.graph;
  m.edge_delay = config.edge_delay;
  m.observer_delay = config.observer_delay;
  m.topology_file = "topology.json";
  io::write_json(dir / m.topology_file, io::to_json(truth));

  for (std::size_t c = 0; c < roots.size(); ++c) {
    const auto id = static_cast<CascadeId>(c);
    const auto trace = propagate(truth, roots[c], id);
    const auto obs_seed = derive_seed(seeds.noise, {id});
    const auto obs = config.hiding == HidingMode::fixed_nodes
                         ? observe_excluding(trace, config.observer_delay, hidden, obs_seed)
                         : observe(trace, ObservationModel{config.observer_delay, config.hidden_fraction}, obs_seed);
    char name[64];
    std::snprintf(name, sizeof name, "cascades/cascade_%05zu.csv", c);
    io::write_observation_csv(dir / name, obs);
    m.cascades.push_back(io::ManifestEntry{id, roots[c], name});
  }
  io::write_json(dir / "manifest.json", io::to_json(m));
  std::cerr << "simulated " << roots.size() << " cascades on " << truth.edge_count() << " edges into "
            << dir.string() << "\n";
  return 0;
}

struct LoadedManifest {
  io::Manifest manifest;
  fs::path base;
  std::vector<Observation> observations;
};

LoadedManifest load_manifest(const std::string& path) {
  LoadedManifest out;
  out.base = fs::path(path).parent_path();
  out.manifest = io::manifest_from_json(io::read_json(path));
  out.observations = io::load_observations(out.manifest, out.base);
  return out;
}

ReconstructionOptions options_for(const Globals& g) {
  ReconstructionOptions opt;
  opt.max_level = g.max_level;
  opt.threads = g.threads.value_or(default_thread_count());
  if (g.seed) opt.weibull_seed = *g.seed;
  return opt;
}

int cmd_infer_levels(const Globals& g, const std::string& manifest_path) {
  const auto loaded = load_manifest(manifest_path);
  const auto params = loaded.manifest.params();
  const auto opt = options_for(g);
  std::optional<WeibullFit> fit;
  const auto max_level = resolve_max_level(params, opt, &fit);
  const auto evidence =
      analyze_cascades(loaded.observations, TruncatedGamma(loaded.manifest.edge_delay), max_level, opt.threads);
  std::vector<LevelPosterior> posts;
  for (const auto& e : evidence) posts.push_back(e.posterior);
  const auto dir = output_dir(g);
  std::ostringstream csv;
  io::write_posterior_csv(csv, posts);
  io::write_text(dir / "posteriors.csv", csv.str());
  Json meta{{"max_level", max_level}, {"max_level_source", g.max_level ? "override" : "weibull"}};
  if (fit) meta["weibull"] = io::to_json(*fit);
  io::write_json(dir / "levels.json", meta);
  return 0;
}

int cmd_reconstruct(const Globals& g, const std::string& manifest_path, const std::string& truth_path) {
  const auto loaded = load_manifest(manifest_path);
  const auto params = loaded.manifest.params();
  const auto result = reconstruct(loaded.observations, params, loaded.manifest.edge_delay, options_for(g));
  const auto dir = output_dir(g);

  Json doc = io::to_json(result.topology);
  Json meta{{"cascades", loaded.observations.size()},
            {"max_level", result.max_level},
            {"max_level_source", g.max_level ? "override" : "weibull"},
            {"pruned_pairs", result.table.pruned_count()},
            {"fallback_nodes", result.fallback_nodes}};
  if (result.weibull) meta["weibull"] = io::to_json(*result.weibull);

  std::string truth_file = truth_path;
  if (truth_file.empty() && !loaded.manifest.topology_file.empty() &&
      fs::exists(loaded.base / loaded.manifest.topology_file))
    truth_file = (loaded.base / loaded.manifest.topology_file).string();
  if (!truth_file.empty()) {
    const auto truth = io::topology_from_json(io::read_json(truth_file));
    const double r = recall(result.topology.edges(), truth.edges());
    meta["recall"] = r;
    meta["fpr_alt"] = fpr_among_reconstructed(result.topology.edges(), truth.edges());
    std::cerr << "recall " << r << " against " << truth_file << "\n";
  }
  doc["metadata"] = std::move(meta);
  io::write_json(dir / "reconstruction.json", doc);
  std::ostringstream csv;
  io::write_scores_csv(csv, result.table);
  io::write_text(dir / "scores.csv", csv.str());
  return 0;
}

int run_weibull_preset(const Globals& g) {
  const std::size_t n = 1000;
  const auto params = GraphModelParams::from_probability(n, 0.05);
  const std::uint64_t seed = g.seed.value_or(1);
  const auto hist = level_hop_histogram(params, 3, default_weibull_roots(n), derive_seed(seed, {0x5eedULL}));
  const auto fit = fit_weibull(hist);
  Json doc = io::to_json(fit);
  doc["n"] = n;
  doc["p"] = 0.05;
  doc["max_level"] = estimate_max_level(fit, n);
  doc["ks_distance"] = discrete_ks_distance(hist, fit);
  Json h = Json::array();
  for (const auto& [hop, count] : hist) h.push_back(Json{{"hop", hop}, {"count", count}});
  doc["hop_histogram"] = std::move(h);
  io::write_json(output_dir(g) / "weibull_fig3.json", doc);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const SimFlags& f) {
  if (g.preset == "fig3") return run_weibull_preset(g);
  std::vector<ExperimentConfig> configs;
  if (!g.preset.empty() && preset_experiments(g.preset).size() > 1) {
    for (auto c : preset_experiments(g.preset)) {
      if (g.seed) c.seed = *g.seed;
      if (g.threads) c.threads = *g.threads;
      if (g.max_level) c.max_level = *g.max_level;
      if (f.repeats) c.repeats = *f.repeats;
      c.validate();
      configs.push_back(std::move(c));
    }
  } else {
    configs.push_back(load_config(g, f));
  }
  const auto dir = output_dir(g);
  std::ostringstream csv;
  io::write_results_header(csv);
  Json summaries = Json::array();
  for (const auto& c : configs) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_experiment(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_results_rows(csv, result);
    auto s = io::summary_json(result);
    s["seconds"] = secs;
    summaries.push_back(std::move(s));
    const auto& last = result.summary.back();
    std::cerr << c.name << ": " << last.cascades << " cascades, recall " << last.recall.mean
              << ", node-level recall " << last.node_level_recall.mean << " (" << secs << " s)\n";
  }
  io::write_text(dir / "results.csv", csv.str());
  io::write_json(dir / "summary.json", summaries);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade-timing reconstruction of random communication overlays"};
  app.require_subcommand(1);
  Globals g;
  SimFlags f;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--output-dir", g.output_dir, "Directory for output files");
  app.add_option("--threads", g.threads, "Worker cap")->check(CLI::PositiveNumber);
  app.add_option("--preset", g.preset, "Named experiment preset");
  app.add_option("--max-level", g.max_level, "Override the Weibull-derived maximum level")->check(CLI::PositiveNumber);

  std::string samples;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit-delay", "Fit a truncated Gamma delay law to samples");
  fit->add_option("samples", samples, "CSV with a delay_ms column")->required();
  fit->add_option("-o,--out", fit_out, "Write the spec here instead of stdout");

  auto* sim = app.add_subcommand("simulate", "Generate a graph and observed cascades");
  auto add_sim_flags = [&f](CLI::App* cmd) {
    cmd->add_option("--n", f.n, "Node count");
    cmd->add_option("--p", f.p, "Edge probability");
    cmd->add_option("--d-bar", f.d_bar, "Mean degree");
    cmd->add_option("--cascades", f.cascades, "Cascade count M");
    cmd->add_option("--hidden-fraction", f.hidden_fraction, "Fraction of reached nodes hidden");
    cmd->add_option("--repeats", f.repeats, "Independent repeats");
  };
  add_sim_flags(sim);

  std::string manifest;
  auto* levels = app.add_subcommand("infer-levels", "Dump level posteriors for simulated cascades");
  levels->add_option("manifest", manifest, "manifest.json from simulate")->required();

  std::string truth;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct the topology from observed cascades");
  rec->add_option("manifest", manifest, "manifest.json from simulate")->required();
  rec->add_option("--truth", truth, "Topology JSON to score against");

  auto* eval = app.add_subcommand("evaluate", "Run experiments and write plot-ready results");
  add_sim_flags(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit_delay(g, samples, fit_out);
    if (*sim) return cmd_simulate(g, f);
    if (*levels) return cmd_infer_levels(g, manifest);
    if (*rec) return cmd_reconstruct(g, manifest, truth);
    if (*eval) return cmd_evaluate(g, f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
