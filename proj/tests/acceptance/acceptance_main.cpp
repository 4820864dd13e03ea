// Runs every acceptance criterion once at its stated tolerance and prints one
// PASS/FAIL line each. Exit status is nonzero if any criterion fails.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ccrecon/cascade_sim.hpp"
#include "ccrecon/evaluation.hpp"
#include "ccrecon/parallel.hpp"
#include "ccrecon/reconstruction.hpp"
#include "oracles.hpp"

using namespace ccrecon;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ExperimentConfig er_config(std::string name, std::size_t n, std::optional<double> p, std::optional<double> d_bar) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.n = n;
  c.p = p;
  c.mean_degree = d_bar;
  c.seed = kSeed;
  c.threads = default_thread_count();
  return c;
}

// Cascade count at which the mean recall first reaches `target`.
std::optional<std::size_t> first_reaching(const RunResult& r, double target) {
  for (const auto& s : r.summary)
    if (s.recall.mean >= target) return s.cascades;
  return std::nullopt;
}

const RunResult& fig4_run() {
  static const RunResult result = [] {
    auto c = er_config("fig4", 1000, 0.05, std::nullopt);
    c.checkpoints = {14, 22};
    c.repeats = 10;
    return run_experiment(c);
  }();
  return result;
}

Outcome criterion_1() {
  const auto& s = fig4_run().at(22);
  return {s.recall.mean >= 0.85, "mean recall at 22 cascades " + num(s.recall.mean) + " (need >= 0.85)"};
}

Outcome criterion_2() {
  const auto& s = fig4_run().at(14);
  const double spread = s.recall.max - s.recall.min;
  const bool ok = s.recall.mean >= 0.40 && s.recall.mean <= 0.52 && spread <= 0.08;
  return {ok, "recall at 14 cascades min/mean/max " + num(s.recall.min) + "/" + num(s.recall.mean) + "/" +
                  num(s.recall.max) + " (need mean in [0.40, 0.52], spread <= 0.08)"};
}

Outcome criterion_3() {
  bool ok = true;
  std::string detail;
  for (double p : {0.01, 0.05, 0.10}) {
    auto c = er_config("fig2", 1000, p, std::nullopt);
    c.checkpoints = {10};
    c.repeats = 10;
    const auto r = run_experiment(c);
    const double v = r.level_tally.fraction();
    ok = ok && v >= 0.90;
    detail += "p=" + num(p, 2) + ": " + num(v) + " (corrected " + num(r.corrected_tally.fraction()) + ")  ";
  }
  return {ok, "pooled node-level recall " + detail + "(need >= 0.90 each)"};
}

Outcome criterion_4() {
  bool ok = true;
  std::string detail;
  double worst = 1.0;
  for (const char* param : {"shape", "scale", "tau_max"}) {
    for (double factor : {0.8, 1.2}) {
      auto c = er_config("fig1", 1000, 0.05, std::nullopt);
      c.checkpoints = {10};
      c.repeats = 3;
      DelaySpec assumed = metu_git_delay();
      if (std::string(param) == "shape") assumed.shape *= factor;
      if (std::string(param) == "scale") assumed.scale *= factor;
      if (std::string(param) == "tau_max") assumed.tau_max *= factor;
      c.inference_delay = assumed;
      const double v = run_experiment(c).level_tally.fraction();
      worst = std::min(worst, v);
      ok = ok && v >= 0.87;
      detail += std::string(param) + "x" + num(factor, 1) + "=" + num(v) + " ";
    }
  }
  return {ok, "node-level recall " + detail + "(worst " + num(worst) + ", need >= 0.87)"};
}

Outcome criterion_5() {
  auto c = er_config("fig8", 1000, std::nullopt, 50.0);
  c.hidden_fraction = 0.5;
  c.checkpoints = every_cascade(110);
  c.repeats = 3;
  const auto r = run_experiment(c);
  const auto reached = first_reaching(r, 0.85);
  double best = 0.0;
  for (const auto& s : r.summary) best = std::max(best, s.recall.mean);
  return {reached.has_value(),
          reached ? "mean recall reaches 0.85 at " + std::to_string(*reached) + " cascades"
                  : "mean recall never reaches 0.85 within 110 cascades (best " + num(best) + ", at 110: " +
                        num(r.at(110).recall.mean) + ")"};
}

Outcome criterion_6() {
  std::optional<double> fraction[2];
  std::string detail;
  const std::size_t sizes[2] = {500, 1000};
  for (int i = 0; i < 2; ++i) {
    auto c = er_config("fig6", sizes[i], std::nullopt, 50.0);
    c.checkpoints = every_cascade(sizes[i] / 10);
    c.repeats = 1;
    const auto r = run_experiment(c);
    const auto reached = first_reaching(r, 0.9);
    if (reached) fraction[i] = static_cast<double>(*reached) / static_cast<double>(sizes[i]);
    double best = 0.0;
    for (const auto& s : r.summary) best = std::max(best, s.recall.mean);
    detail += "N=" + std::to_string(sizes[i]) + ": " +
              (reached ? "fraction " + num(*fraction[i]) : "no 0.9 within 0.1N (best " + num(best) + ")") + "  ";
  }
  const bool ok = fraction[0] && fraction[1] && *fraction[1] < *fraction[0];
  return {ok, detail + "(need fraction(1000) < fraction(500))"};
}

Outcome criterion_7() {
  const auto fit = fit_level_weibull(GraphModelParams::from_probability(1000, 0.05), 3, 1000,
                                     derive_seed(kSeed, {0x5eedULL}));
  const bool ok = fit.shape >= 4.4 && fit.shape <= 5.4 && fit.scale >= 2.05 && fit.scale <= 2.5;
  return {ok, "shape " + num(fit.shape) + " (need [4.4, 5.4]), scale " + num(fit.scale) + " (need [2.05, 2.5])"};
}

Outcome criterion_8() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(derive_seed(kSeed, {8}));
  double worst = 0.0;
  std::size_t pruned_mismatch = 0;
  std::size_t pairs = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = 2 + uniform_index(rng, 7);
    const std::size_t m = 1 + uniform_index(rng, std::min<std::size_t>(3, n));
    const double p = 0.2 + 0.8 * uniform01(rng);
    const std::size_t max_level = 2 + uniform_index(rng, 5);
    const double hidden = uniform_index(rng, 2) ? 0.0 : 0.3;
    const auto s = metu_git_delay();
    const auto params = GraphModelParams::from_probability(n, p);
    const auto g = generate_er(params, s, rng());
    const auto roots = choose_roots(n, m, rng());
    std::vector<Observation> obs;
    for (std::size_t c = 0; c < m; ++c)
      obs.push_back(observe(propagate(g, roots[c], static_cast<CascadeId>(c)), s, hidden, rng()));
    ReconstructionOptions opt;
    opt.max_level = max_level;
    const auto r = reconstruct(obs, params, s, opt);
    const auto ref = oracle::accumulate_all(obs, s, max_level);
    for (const auto& [key, w] : ref.weight) {
      ++pairs;
      worst = std::max(worst, std::abs(r.table.weight(key.first, key.second) - w));
      pruned_mismatch += r.table.pruned(key.first, key.second) != ref.pruned.at(key) ? 1 : 0;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |W - W_literal| = %.3g over %zu pairs, %zu pruned-set mismatches, %.2f s",
                worst, pairs, pruned_mismatch, secs);
  return {worst <= 1e-12 && pruned_mismatch == 0, buf};
}

Outcome criterion_9() {
  std::string detail;
  bool ok = true;

  // posterior normalization on every node of a batch of simulated cascades
  double worst_norm = 0.0;
  {
    const auto s = metu_git_delay();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = generate_er(GraphModelParams::from_probability(300, 0.03 + 0.005 * seed), s, seed);
      for (NodeId root = 0; root < 5; ++root) {
        const auto obs = observe(propagate(g, root, root), s, 0.1 * (seed % 5), seed * 100 + root);
        const auto post = infer_levels(obs, s, 3 + seed % 4);
        for (std::size_t k = 0; k < post.size(); ++k) {
          const auto row = post.row(k);
          worst_norm = std::max(worst_norm, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
        }
      }
    }
  }
  ok = ok && worst_norm <= 1e-9;
  detail += "norm err " + std::to_string(worst_norm) + "; ";

  const auto s = metu_git_delay();
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return truncated_pdf(t, s); }, s.tau_min, s.tau_max, 20, 1e-12);
  ok = ok && std::abs(mass - 1.0) <= 1e-6;
  detail += "pdf mass " + num(mass, 9) + "; ";

  bool order_ok = true;
  {
    const auto g = generate_er(GraphModelParams::from_probability(150, 0.08), s, 3);
    const TruncatedGamma delay(s);
    std::vector<CascadeWeights> ws;
    for (NodeId root = 0; root < 15; ++root)
      ws.push_back(analyze_cascade(observe(propagate(g, root, root), s, 0.2, root), delay, 5).weights);
    EdgeScoreTable a(150);
    EdgeScoreTable b(150);
    for (const auto& w : ws) a.accumulate(w);
    for (auto it = ws.rbegin(); it != ws.rend(); ++it) b.accumulate(*it);
    order_ok = std::equal(a.pruned_flags().begin(), a.pruned_flags().end(), b.pruned_flags().begin());
    for (std::size_t i = 0; i < a.weights().size(); ++i)
      order_ok = order_ok && std::abs(a.weights()[i] - b.weights()[i]) <= 1e-12 * std::max(1.0, a.weights()[i]);
  }
  ok = ok && order_ok;
  detail += std::string("order independence ") + (order_ok ? "ok" : "broken") + "; ";

  auto sweep = er_config("sweep", 200, std::nullopt, 20.0);
  sweep.checkpoints = every_cascade(200);
  sweep.repeats = 3;
  const auto r1 = run_experiment(sweep);
  const auto r2 = run_experiment(sweep);
  bool same = r1.points.size() == r2.points.size();
  for (std::size_t i = 0; same && i < r1.points.size(); ++i)
    same = r1.points[i].recall == r2.points[i].recall && r1.points[i].fpr == r2.points[i].fpr &&
           r1.points[i].node_level_recall == r2.points[i].node_level_recall;
  ok = ok && same;
  detail += std::string("determinism ") + (same ? "ok" : "broken") + "; ";

  std::vector<double> m, rec, fp;
  for (const auto& sm : r1.summary) {
    m.push_back(static_cast<double>(sm.cascades));
    rec.push_back(sm.recall.mean);
    fp.push_back(sm.fpr.mean);
  }
  const double rho_recall = spearman(m, rec);
  const double rho_fpr = spearman(m, fp);
  const bool mono = rho_recall > 0.9 && rho_fpr < -0.5;
  ok = ok && mono;
  detail += "spearman recall " + num(rho_recall) + " (need > 0.9), fpr " + num(rho_fpr) + " (need < -0.5)";
  return {ok, detail};
}

Outcome criterion_10() {
  auto c = er_config("tree", 1000, std::nullopt, 2.0 * 999.0 / 1000.0);
  c.graph = GraphKind::random_tree;
  c.checkpoints = {315};
  c.repeats = 1;
  const auto r = run_experiment(c);
  const double v = r.at(315).recall.mean;
  return {v >= 0.80, "recall on a 1000-node random tree after 315 cascades " + num(v) + " (need >= 0.80)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1  fig4 recall at 22 cascades", criterion_1},
      {"2  fig5 spread at 14 cascades", criterion_2},
      {"3  fig2 node-level recall", criterion_3},
      {"4  fig1 delay misspecification", criterion_4},
      {"5  fig8 half hidden", criterion_5},
      {"6  fig6 size trend", criterion_6},
      {"7  hop-distance weibull", criterion_7},
      {"8  literal oracle equivalence", criterion_8},
      {"9  invariant suite", criterion_9},
      {"10 random tree", criterion_10},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
