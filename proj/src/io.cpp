#include "ccrecon/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "ccrecon/errors.hpp"

namespace ccrecon::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError(source, line, "not a number: '" + std::string(cell) + "'");
  if (!std::isfinite(v)) throw ParseError(source, line, "non-finite value");
  return v;
}

std::uint64_t parse_uint(std::string_view cell, const std::string& source, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError(source, line, "not a non-negative integer: '" + std::string(cell) + "'");
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

template <class T>
T get(const Json& doc, const char* key, const std::string& what) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(what + ": missing or invalid '" + key + "'");
  }
}

}  // namespace

Json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<double> parse_delay_samples(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != "delay_ms") throw ParseError(source, number, "expected header 'delay_ms'");
      header = true;
      continue;
    }
    const auto cells = split(t);
    if (cells.size() != 1) throw ParseError(source, number, "expected one column");
    values.push_back(parse_double(cells[0], source, number));
  }
  if (!header) throw ParseError(source, number, "empty file, expected header 'delay_ms'");
  return values;
}

std::vector<double> read_delay_samples(const fs::path& path) {
  auto in = open_in(path);
  return parse_delay_samples(in, path.string());
}

Json to_json(const DelaySpec& spec) {
  return Json{{"shape", spec.shape}, {"scale", spec.scale}, {"tau_min", spec.tau_min}, {"tau_max", spec.tau_max}};
}

DelaySpec delay_spec_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("delay spec must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "shape" && key != "scale" && key != "tau_min" && key != "tau_max")
      throw ConfigError("delay spec: unknown key '" + key + "'");
  DelaySpec spec{get<double>(doc, "shape", "delay spec"), get<double>(doc, "scale", "delay spec"),
                 get<double>(doc, "tau_min", "delay spec"), get<double>(doc, "tau_max", "delay spec")};
  try {
    validate(spec);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("delay spec: ") + e.what());
  }
  return spec;
}

DelaySpec delay_spec_from_value(const Json& value, const fs::path& base_dir) {
  if (value.is_string()) return delay_spec_from_json(read_json(base_dir / value.get<std::string>()));
  return delay_spec_from_json(value);
}

Json to_json(const Topology& topology) {
  Json edges = Json::array();
  const auto list = topology.edges();
  for (std::size_t e = 0; e < list.size(); ++e) {
    Json row{list[e].u, list[e].v};
    if (topology.has_delays()) row.push_back(topology.delays()[e]);
    edges.push_back(std::move(row));
  }
  return Json{{"n", topology.node_count()}, {"edges", std::move(edges)}};
}

Topology topology_from_json(const Json& doc) {
  const auto n = get<std::size_t>(doc, "n", "topology");
  const auto& rows = doc.at("edges");
  if (!rows.is_array()) throw ConfigError("topology: 'edges' must be an array");
  std::vector<NodePair> edges;
  std::vector<double> delays;
  bool with_delays = false;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    if (!row.is_array() || (row.size() != 2 && row.size() != 3))
      throw ConfigError("topology: edge " + std::to_string(k) + " must be [i, j] or [i, j, delay_ms]");
    if (k == 0) with_delays = row.size() == 3;
    if ((row.size() == 3) != with_delays)
      throw ConfigError("topology: edge " + std::to_string(k) + " mixes delayed and undelayed rows");
    try {
      edges.push_back(make_pair(row[0].get<NodeId>(), row[1].get<NodeId>()));
      if (with_delays) delays.push_back(row[2].get<double>());
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("topology: edge " + std::to_string(k) + " has non-numeric fields");
    }
  }
  return Topology(n, std::move(edges), std::move(delays));
}

void write_observation_csv(std::ostream& out, const Observation& obs) {
  out << "cascade_id,node,observed_time_ms\n";
  for (const auto& a : obs.arrivals) out << obs.cascade_id << ',' << a.node << ',' << fmt(a.time_ms) << '\n';
}

void write_observation_csv(const fs::path& path, const Observation& obs) {
  auto out = open_out(path);
  write_observation_csv(out, obs);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Observation parse_observation_csv(std::istream& in, const std::string& source) {
  Observation obs;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != "cascade_id,node,observed_time_ms")
        throw ParseError(source, number, "expected header 'cascade_id,node,observed_time_ms'");
      header = true;
      continue;
    }
    const auto cells = split(t);
    if (cells.size() != 3) throw ParseError(source, number, "expected 3 columns");
    const auto id = parse_uint(cells[0], source, number);
    if (first) {
      obs.cascade_id = static_cast<CascadeId>(id);
      first = false;
    } else if (id != obs.cascade_id) {
      throw ParseError(source, number, "cascade id differs from the first row");
    }
    const auto node = parse_uint(cells[1], source, number);
    if (node > std::numeric_limits<NodeId>::max()) throw ParseError(source, number, "node id out of range");
    obs.arrivals.push_back(Arrival{static_cast<NodeId>(node), parse_double(cells[2], source, number)});
  }
  if (!header) throw ParseError(source, number, "empty file, expected a header");
  canonicalize(obs);
  try {
    validate(obs);
  } catch (const DomainError& e) {
    throw IoError("'" + source + "': " + e.what());
  }
  return obs;
}

Observation read_observation_csv(const fs::path& path) {
  auto in = open_in(path);
  return parse_observation_csv(in, path.string());
}

GraphModelParams Manifest::params() const {
  if (p) return GraphModelParams::from_probability(n, *p);
  return GraphModelParams::from_mean_degree(n, mean_degree.value_or(0.0));
}

Json to_json(const Manifest& m) {
  Json doc;
  doc["n"] = m.n;
  const auto params = m.params();
  doc["p"] = params.p;
  doc["d_bar"] = params.mean_degree;
  doc["graph"] = graph_kind_name(m.graph);
  doc["seed"] = m.seed;
  doc["hidden_fraction"] = m.hidden_fraction;
  doc["hiding"] = hiding_mode_name(m.hiding);
  doc["edge_delay"] = to_json(m.edge_delay);
  doc["observer_delay"] = m.observer_delay ? to_json(*m.observer_delay) : Json(nullptr);
  doc["topology_file"] = m.topology_file;
  Json cascades = Json::array();
  for (const auto& c : m.cascades)
    cascades.push_back(Json{{"cascade_id", c.cascade_id}, {"root", c.root}, {"file", c.file}});
  doc["cascades"] = std::move(cascades);
  return doc;
}

Manifest manifest_from_json(const Json& doc) {
  Manifest m;
  m.n = get<std::size_t>(doc, "n", "manifest");
  if (doc.contains("p")) {
    m.p = get<double>(doc, "p", "manifest");
  } else {
    m.mean_degree = get<double>(doc, "d_bar", "manifest");
  }
  m.seed = doc.value("seed", std::uint64_t{0});
  m.hidden_fraction = doc.value("hidden_fraction", 0.0);
  if (doc.contains("hiding")) m.hiding = parse_hiding_mode(get<std::string>(doc, "hiding", "manifest"));
  if (doc.contains("graph")) m.graph = parse_graph_kind(get<std::string>(doc, "graph", "manifest"));
  m.edge_delay = doc.contains("edge_delay") ? delay_spec_from_json(doc.at("edge_delay")) : metu_git_delay();
  if (doc.contains("observer_delay") && !doc.at("observer_delay").is_null())
    m.observer_delay = delay_spec_from_json(doc.at("observer_delay"));
  m.topology_file = doc.value("topology_file", std::string{});
  if (!doc.contains("cascades") || !doc.at("cascades").is_array())
    throw ConfigError("manifest: 'cascades' must be an array");
  for (const auto& c : doc.at("cascades")) {
    ManifestEntry e;
    e.cascade_id = get<CascadeId>(c, "cascade_id", "manifest cascade");
    e.root = c.value("root", NodeId{0});
    e.file = get<std::string>(c, "file", "manifest cascade");
    m.cascades.push_back(std::move(e));
  }
  return m;
}

std::vector<Observation> load_observations(const Manifest& manifest, const fs::path& base_dir) {
  std::vector<Observation> out;
  out.reserve(manifest.cascades.size());
  for (const auto& entry : manifest.cascades) {
    const auto path = base_dir / entry.file;
    if (!fs::exists(path)) throw IoError("cascade file not found: '" + path.string() + "'");
    auto obs = read_observation_csv(path);
    if (!obs.empty() && obs.cascade_id != entry.cascade_id)
      throw IoError("'" + path.string() + "': cascade id " + std::to_string(obs.cascade_id) +
                    " does not match manifest entry " + std::to_string(entry.cascade_id));
    obs.cascade_id = entry.cascade_id;
    for (const auto& a : obs.arrivals)
      if (a.node >= manifest.n)
        throw IoError("'" + path.string() + "': node " + std::to_string(a.node) + " outside 0..N-1");
    out.push_back(std::move(obs));
  }
  return out;
}

void write_posterior_csv(std::ostream& out, std::span<const LevelPosterior> posteriors) {
  out << "cascade_id,node,level,probability\n";
  for (const auto& post : posteriors)
    for (std::size_t k = 0; k < post.size(); ++k)
      for (Level l = 1; l <= post.max_level; ++l)
        out << post.cascade_id << ',' << post.nodes[k] << ',' << l << ',' << fmt(post.prob(k, l)) << '\n';
}

Json to_json(const WeibullFit& fit) { return Json{{"shape", fit.shape}, {"scale", fit.scale}}; }

void write_scores_csv(std::ostream& out, const EdgeScoreTable& table) {
  out << "node_i,node_j,W,pruned\n";
  const std::size_t n = table.node_count();
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (table.evidence(u, v) > 0)
        out << u << ',' << v << ',' << fmt(table.weight(u, v)) << ',' << (table.pruned(u, v) ? 1 : 0) << '\n';
}

void write_results_header(std::ostream& out) {
  out << "experiment,repeat,cascades,recall,fpr,fpr_alt,node_level_recall\n";
}

void write_results_rows(std::ostream& out, const RunResult& result) {
  for (const auto& pt : result.points)
    out << result.experiment << ',' << pt.repeat << ',' << pt.cascades << ',' << fmt(pt.recall) << ','
        << fmt(pt.fpr) << ',' << fmt(pt.fpr_alt) << ',' << fmt(pt.node_level_recall) << '\n';
}

namespace {

Json stat_json(const Stat& s) { return Json{{"min", s.min}, {"mean", s.mean}, {"max", s.max}}; }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json summary_json(const RunResult& result) {
  Json doc;
  doc["experiment"] = result.experiment;
  doc["config"] = to_json(result.config);
  doc["max_level"] = result.max_level;
  doc["weibull"] = to_json(result.weibull);
  doc["observed_nodes"] = result.observed_nodes;
  doc["fallback_nodes"] = result.fallback_nodes;
  doc["pooled_node_level_recall"] = result.level_tally.fraction();
  doc["pooled_corrected_level_recall"] = result.corrected_tally.fraction();
  Json seeds = Json::array();
  for (const auto& s : result.seeds)
    seeds.push_back(Json{{"graph", s.graph}, {"roots", s.roots}, {"noise", s.noise}, {"hiding", s.hiding}});
  doc["repeat_seeds"] = std::move(seeds);
  Json rows = Json::array();
  for (const auto& s : result.summary) {
    Json fpr = stat_json(s.fpr);
    for (auto& [k, v] : fpr.items()) v = number_or_null(v.get<double>());
    rows.push_back(Json{{"cascades", s.cascades},
                        {"recall", stat_json(s.recall)},
                        {"fpr", std::move(fpr)},
                        {"fpr_alt", stat_json(s.fpr_alt)},
                        {"precision", stat_json(s.precision)},
                        {"node_level_recall", stat_json(s.node_level_recall)},
                        {"corrected_level_recall", stat_json(s.corrected_level_recall)}});
  }
  doc["checkpoints"] = std::move(rows);
  return doc;
}

Json to_json(const ExperimentConfig& c) {
  Json doc;
  doc["name"] = c.name;
  doc["n"] = c.n;
  if (c.p) doc["p"] = *c.p;
  if (c.mean_degree) doc["d_bar"] = *c.mean_degree;
  doc["graph"] = graph_kind_name(c.graph);
  doc["edge_delay"] = to_json(c.edge_delay);
  doc["observer_delay"] = c.observer_delay ? to_json(*c.observer_delay) : Json(nullptr);
  if (c.inference_delay) doc["inference_delay"] = to_json(*c.inference_delay);
  doc["checkpoints"] = c.checkpoints;
  doc["hidden_fraction"] = c.hidden_fraction;
  doc["hiding"] = hiding_mode_name(c.hiding);
  doc["repeats"] = c.repeats;
  doc["seed"] = c.seed;
  doc["max_level"] = c.max_level ? Json(*c.max_level) : Json(nullptr);
  doc["weibull_instances"] = c.weibull_instances;
  if (c.weibull_roots) doc["weibull_roots"] = *c.weibull_roots;
  doc["threads"] = c.threads;
  return doc;
}

ExperimentConfig apply_config(const Json& doc, ExperimentConfig c, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const std::string what = "config";
  for (const auto& [key, value] : doc.items()) {
    if (key == "name") {
      c.name = get<std::string>(doc, "name", what);
    } else if (key == "n" || key == "N") {
      c.n = get<std::size_t>(doc, key.c_str(), what);
    } else if (key == "p") {
      c.p = get<double>(doc, "p", what);
      c.mean_degree.reset();
    } else if (key == "d_bar") {
      c.mean_degree = get<double>(doc, "d_bar", what);
      c.p.reset();
    } else if (key == "graph") {
      c.graph = parse_graph_kind(get<std::string>(doc, "graph", what));
    } else if (key == "edge_delay" || key == "delay") {
      c.edge_delay = delay_spec_from_value(value, base_dir);
    } else if (key == "observer_delay") {
      if (value.is_null()) {
        c.observer_delay.reset();
      } else {
        c.observer_delay = delay_spec_from_value(value, base_dir);
      }
    } else if (key == "inference_delay") {
      if (value.is_null()) {
        c.inference_delay.reset();
      } else {
        c.inference_delay = delay_spec_from_value(value, base_dir);
      }
    } else if (key == "cascades" || key == "M") {
      c.checkpoints = {get<std::size_t>(doc, key.c_str(), what)};
    } else if (key == "checkpoints") {
      c.checkpoints = get<std::vector<std::size_t>>(doc, "checkpoints", what);
    } else if (key == "hidden_fraction") {
      c.hidden_fraction = get<double>(doc, "hidden_fraction", what);
    } else if (key == "hiding") {
      c.hiding = parse_hiding_mode(get<std::string>(doc, "hiding", what));
    } else if (key == "repeats") {
      c.repeats = get<std::size_t>(doc, "repeats", what);
    } else if (key == "seed") {
      c.seed = get<std::uint64_t>(doc, "seed", what);
    } else if (key == "max_level") {
      if (value.is_null()) {
        c.max_level.reset();
      } else {
        c.max_level = get<std::size_t>(doc, "max_level", what);
      }
    } else if (key == "weibull_instances") {
      c.weibull_instances = get<std::size_t>(doc, "weibull_instances", what);
    } else if (key == "weibull_roots") {
      c.weibull_roots = get<std::size_t>(doc, "weibull_roots", what);
    } else if (key == "threads") {
      c.threads = get<std::size_t>(doc, "threads", what);
    } else if (key == "output_dir") {
      // consumed by the command line front end
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

std::string graph_kind_name(GraphKind kind) {
  return kind == GraphKind::random_tree ? "random_tree" : "erdos_renyi";
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "erdos_renyi") return GraphKind::erdos_renyi;
  if (name == "random_tree") return GraphKind::random_tree;
  throw ConfigError("unknown graph kind '" + name + "'");
}

std::string hiding_mode_name(HidingMode mode) {
  return mode == HidingMode::fixed_nodes ? "fixed_nodes" : "per_cascade";
}

HidingMode parse_hiding_mode(const std::string& name) {
  if (name == "per_cascade") return HidingMode::per_cascade;
  if (name == "fixed_nodes") return HidingMode::fixed_nodes;
  throw ConfigError("unknown hiding mode '" + name + "'");
}

}  // namespace ccrecon::io
