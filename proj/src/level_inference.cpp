#include "ccrecon/level_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccrecon/errors.hpp"

namespace ccrecon {

std::size_t LevelPosterior::fallback_count() const {
  return static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), std::uint8_t{1}));
}

LevelPosterior infer_levels(const Observation& obs, const TruncatedGamma& delay, std::size_t max_level) {
  if (obs.empty()) throw DomainError("cannot infer levels of an empty observation");
  if (max_level < 1) throw DomainError("max_level must be at least 1");
  validate(obs);

  const std::size_t n = obs.size();
  const double tau_min = delay.spec().tau_min;
  const double tau_max = delay.spec().tau_max;
  LevelPosterior post;
  post.cascade_id = obs.cascade_id;
  post.max_level = max_level;
  post.nodes.resize(n);
  post.probs.assign(n * max_level, 0.0);
  post.level_one.assign(n, LevelOneRule::none);
  post.fallback.assign(n, 0);

  std::vector<double> acc(max_level, 0.0);
  std::size_t window_start = 0;  // first i with t_k - t_i <= tau_max
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = obs.arrivals[k].time_ms;
    post.nodes[k] = obs.arrivals[k].node;
    double* row = post.probs.data() + k * max_level;

    if (k == 0) {
      post.level_one[k] = LevelOneRule::first_arrival;
    } else if (tk - obs.arrivals[k - 1].time_ms > tau_max) {
      post.level_one[k] = LevelOneRule::after_silence;
    } else if (tk - obs.arrivals[0].time_ms < tau_min) {
      // Sorted times: the earliest arrival is the farthest one.
      post.level_one[k] = LevelOneRule::within_min_delay;
    }
    if (post.level_one[k] != LevelOneRule::none) {
      row[0] = 1.0;
      continue;
    }
    if (max_level == 1) {
      row[0] = 1.0;
      post.fallback[k] = 1;
      continue;
    }

    while (tk - obs.arrivals[window_start].time_ms > tau_max) ++window_start;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = window_start; i < k; ++i) {
      const double d = delay.pdf(tk - obs.arrivals[i].time_ms);
      if (d == 0.0) continue;
      const double* prev = post.probs.data() + i * max_level;
      for (std::size_t col = 1; col < max_level; ++col) acc[col] += prev[col - 1] * d;
    }
    double total = 0.0;
    for (std::size_t col = 1; col < max_level; ++col) total += acc[col];
    if (total > 0.0 && std::isfinite(total)) {
      for (std::size_t col = 1; col < max_level; ++col) row[col] = acc[col] / total;
    } else {
      post.fallback[k] = 1;
      const double u = 1.0 / static_cast<double>(max_level - 1);
      for (std::size_t col = 1; col < max_level; ++col) row[col] = u;
    }
  }
  return post;
}

LevelPosterior infer_levels(const Observation& obs, const DelaySpec& spec, std::size_t max_level) {
  return infer_levels(obs, TruncatedGamma(spec), max_level);
}

std::vector<Level> map_levels(const LevelPosterior& posterior) {
  std::vector<Level> levels(posterior.size());
  for (std::size_t k = 0; k < posterior.size(); ++k) {
    const auto row = posterior.row(k);
    const auto best = std::max_element(row.begin(), row.end());  // first maximum
    levels[k] = static_cast<Level>(best - row.begin()) + 1;
  }
  return levels;
}

std::map<Level, double> level_centroids(const Observation& obs, const LevelPosterior& posterior) {
  if (obs.size() != posterior.size()) throw DomainError("posterior does not match observation");
  std::vector<double> mass(posterior.max_level, 0.0);
  std::vector<double> weighted(posterior.max_level, 0.0);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto row = posterior.row(k);
    for (std::size_t col = 0; col < row.size(); ++col) {
      mass[col] += row[col];
      weighted[col] += row[col] * obs.arrivals[k].time_ms;
    }
  }
  std::map<Level, double> centroids;
  for (std::size_t col = 0; col < mass.size(); ++col)
    if (mass[col] > 0.0) centroids.emplace(static_cast<Level>(col + 1), weighted[col] / mass[col]);
  return centroids;
}

std::map<Level, double> populated_centroids(const Observation& obs, const LevelPosterior& posterior) {
  auto centroids = level_centroids(obs, posterior);
  std::vector<bool> populated(posterior.max_level + 1, false);
  for (Level l : map_levels(posterior)) populated[l] = true;
  std::erase_if(centroids, [&](const auto& entry) { return !populated[entry.first]; });
  return centroids;
}

double mean_centroid_gap(const std::map<Level, double>& centroids) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (auto it = centroids.begin(); it != centroids.end(); ++it) {
    const auto prev = centroids.find(it->first - 1);
    if (it->first > 1 && prev != centroids.end()) {
      sum += it->second - prev->second;
      ++pairs;
    }
  }
  if (pairs == 0) throw DomainError("mean centroid gap needs two populated consecutive levels");
  return sum / static_cast<double>(pairs);
}

double WeibullFit::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / scale, shape));
}

double WeibullFit::pdf(double x) const {
  if (x < 0.0) return 0.0;
  const double z = x / scale;
  return shape / scale * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
}

WeibullFit fit_weibull(const HopHistogram& histogram) {
  double total = 0.0;
  double sum_log = 0.0;
  double x_max = 0.0;
  for (const auto& [value, count] : histogram) {
    if (value == 0 || count == 0) continue;
    total += static_cast<double>(count);
    sum_log += static_cast<double>(count) * std::log(static_cast<double>(value));
    x_max = std::max(x_max, static_cast<double>(value));
  }
  if (total < 10.0) throw FitError("Weibull fit needs at least 10 positive values");
  const double mean_log = sum_log / total;
  std::size_t distinct = 0;
  for (const auto& [value, count] : histogram) distinct += (value > 0 && count > 0) ? 1 : 0;
  if (distinct < 2) throw FitError("Weibull fit: histogram is a point mass");

  // Profile score in the shape: increasing in k, root is the MLE.
  auto moments = [&](double k, double& s0, double& s1) {
    s0 = 0.0;
    s1 = 0.0;
    for (const auto& [value, count] : histogram) {
      if (value == 0 || count == 0) continue;
      const double x = static_cast<double>(value);
      const double r = std::pow(x / x_max, k) * static_cast<double>(count);
      s0 += r;
      s1 += r * std::log(x);
    }
  };
  auto score = [&](double k) {
    double s0 = 0.0;
    double s1 = 0.0;
    moments(k, s0, s1);
    return s1 / s0 - 1.0 / k - mean_log;
  };

  double lo = 1e-3;
  double hi = 1.0;
  while (score(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw FitError("Weibull fit: shape diverges");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) < 0.0 ? lo : hi) = mid;
  }
  const double k = 0.5 * (lo + hi);
  double s0 = 0.0;
  double s1 = 0.0;
  moments(k, s0, s1);
  const double scale = x_max * std::pow(s0 / total, 1.0 / k);
  if (!std::isfinite(k) || !std::isfinite(scale) || !(scale > 0.0))
    throw FitError("Weibull fit did not converge");
  return WeibullFit{k, scale};
}

double discrete_ks_distance(const HopHistogram& histogram, const WeibullFit& fit) {
  double total = 0.0;
  std::uint32_t h_max = 0;
  for (const auto& [value, count] : histogram) {
    total += static_cast<double>(count);
    if (count > 0) h_max = std::max(h_max, value);
  }
  if (total == 0.0) throw DomainError("KS distance of an empty histogram");
  double cumulative = 0.0;
  double worst = 0.0;
  auto it = histogram.begin();
  for (std::uint32_t h = 0; h <= h_max; ++h) {
    while (it != histogram.end() && it->first <= h) {
      cumulative += static_cast<double>(it->second);
      ++it;
    }
    worst = std::max(worst, std::abs(cumulative / total - fit.cdf(h + 0.5)));
  }
  return worst;
}

HopHistogram hop_histogram(const Topology& topology, std::span<const NodeId> roots) {
  HopHistogram histogram;
  for (NodeId root : roots) {
    const auto levels = shortest_hop_levels(topology, root);
    for (NodeId v = 0; v < levels.size(); ++v)
      if (v != root && levels[v] != kUnreached) ++histogram[levels[v] - 1];
  }
  return histogram;
}

HopHistogram level_hop_histogram(const GraphModelParams& params, std::size_t n_instances,
                                 std::size_t n_roots, std::uint64_t seed, GraphKind kind) {
  if (n_instances < 1 || n_roots < 1) throw DomainError("Weibull level fit needs instances and roots");
  HopHistogram pooled;
  for (std::size_t inst = 0; inst < n_instances; ++inst) {
    Rng rng(derive_seed(seed, {inst, 0}));
    auto edges = kind == GraphKind::random_tree ? sample_tree_edges(params.n, rng)
                                                : sample_er_edges(params, rng);
    const Topology topology(params.n, std::move(edges));
    const auto roots = choose_roots(params.n, std::min(n_roots, params.n), derive_seed(seed, {inst, 1}));
    for (const auto& [hop, count] : hop_histogram(topology, roots)) pooled[hop] += count;
  }
  return pooled;
}

WeibullFit fit_level_weibull(const GraphModelParams& params, std::size_t n_instances,
                             std::size_t n_roots, std::uint64_t seed, GraphKind kind) {
  return fit_weibull(level_hop_histogram(params, n_instances, n_roots, seed, kind));
}

std::size_t estimate_max_level(const WeibullFit& fit, std::size_t n) {
  if (!(fit.shape > 0.0) || !(fit.scale > 0.0)) throw DomainError("invalid Weibull fit");
  if (n < 1) throw DomainError("node count must be positive");
  constexpr std::size_t kFloor = 3;
  const double target = 1.0 - 1.0 / (10.0 * static_cast<double>(n));
  const double guess = fit.scale * std::pow(std::log(10.0 * static_cast<double>(n)), 1.0 / fit.shape);
  if (!std::isfinite(guess) || guess > 1e6) throw DomainError("Weibull quantile out of range");
  auto hops = static_cast<std::size_t>(std::max(1.0, std::ceil(guess)));
  while (hops > 1 && fit.cdf(static_cast<double>(hops - 1)) >= target) --hops;
  while (fit.cdf(static_cast<double>(hops)) < target) ++hops;
  return std::max(kFloor, hops + 1);
}

namespace {

double segment_centroid(const Observation& obs, const LevelPosterior& post, std::size_t begin,
                        std::size_t end, Level level) {
  double mass = 0.0;
  double weighted = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    const double p = post.prob(k, level);
    mass += p;
    weighted += p * obs.arrivals[k].time_ms;
  }
  return mass > 0.0 ? weighted / mass : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::vector<Level> correct_gaps(const Observation& obs, const LevelPosterior& posterior,
                                double mean_gap, const WeibullFit& weibull) {
  if (obs.size() != posterior.size()) throw DomainError("posterior does not match observation");
  const auto raw = map_levels(posterior);
  auto corrected = raw;
  if (raw.empty()) return corrected;

  std::vector<std::size_t> starts{0};
  for (std::size_t k = 1; k < posterior.size(); ++k)
    if (posterior.level_one[k] == LevelOneRule::after_silence) starts.push_back(k);
  starts.push_back(posterior.size());

  for (std::size_t s = 1; s + 1 < starts.size(); ++s) {
    const std::size_t prev_begin = starts[s - 1];
    const std::size_t begin = starts[s];
    const std::size_t end = starts[s + 1];
    std::size_t deepest = prev_begin;
    for (std::size_t k = prev_begin; k < begin; ++k)
      if (raw[k] > raw[deepest]) deepest = k;
    const Level last_level = corrected[deepest];

    std::size_t invisible = 0;
    const double before = segment_centroid(obs, posterior, prev_begin, begin, raw[deepest]);
    const double after = segment_centroid(obs, posterior, begin, end, 1);
    if (mean_gap > 0.0 && std::isfinite(before) && std::isfinite(after) && after > before)
      invisible = static_cast<std::size_t>(std::floor((after - before) / mean_gap + 1e-9));
    const auto correction = static_cast<Level>(invisible + last_level);
    for (std::size_t k = begin; k < end; ++k) corrected[k] = raw[k] + correction;
  }

  const Level deepest = *std::max_element(corrected.begin(), corrected.end());
  if (deepest < posterior.max_level) {
    auto histogram_for = [&](Level shift) {
      HopHistogram h;
      for (Level l : corrected) ++h[l + shift - 1];
      return h;
    };
    Level best_shift = 0;
    double best = discrete_ks_distance(histogram_for(0), weibull);
    for (Level shift = 1; deepest + shift <= posterior.max_level; ++shift) {
      const double d = discrete_ks_distance(histogram_for(shift), weibull);
      if (d < best - 1e-12) {
        best = d;
        best_shift = shift;
      }
    }
    if (best_shift > 0)
      for (auto& l : corrected) l += best_shift;
  }
  return corrected;
}

}  // namespace ccrecon
