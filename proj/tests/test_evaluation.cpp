#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "ccrecon/errors.hpp"
#include "ccrecon/evaluation.hpp"

using namespace ccrecon;

namespace {

const NodePair AB{0, 1};
const NodePair AC{0, 2};
const NodePair BC{1, 2};
const NodePair BD{1, 3};
const NodePair CD{2, 3};

}  // namespace

TEST_CASE("recall") {
  const std::vector<NodePair> truth{AB, BC, CD};
  CHECK(recall(truth, truth) == 1.0);
  CHECK(recall(std::vector<NodePair>{AC, BD}, truth) == 0.0);
  CHECK(recall(std::vector<NodePair>{AB, BC, BD}, truth) == doctest::Approx(2.0 / 3));
  CHECK(recall(std::vector<NodePair>{AB}, std::vector<NodePair>{}) == 1.0);
}

TEST_CASE("fpr") {
  const std::vector<NodePair> truth{AB};
  CHECK(fpr(truth, truth, 4) == 0.0);
  CHECK(fpr(std::vector<NodePair>{AB, CD}, truth, 4) == doctest::Approx(0.2));
  std::vector<NodePair> all;
  for (NodeId u = 0; u < 4; ++u)
    for (NodeId v = u + 1; v < 4; ++v) all.push_back({u, v});
  CHECK(fpr(all, truth, 4) == 1.0);
  CHECK_THROWS_AS(fpr(all, all, 4), DomainError);
  CHECK(fpr_among_reconstructed(std::vector<NodePair>{AB, CD}, truth) == 0.5);
  CHECK(precision(std::vector<NodePair>{AB, CD}, truth) == 0.5);
}

TEST_CASE("node level recall") {
  const std::vector<Level> truth{1, 2, 2, 3};
  const std::vector<NodeId> nodes{0, 1, 2, 3};
  CHECK(node_level_recall(nodes, truth, truth) == 1.0);
  CHECK(node_level_recall(std::vector<NodeId>{0}, std::vector<Level>{1}, truth) == 1.0);

  std::vector<Level> ten_truth(10, 2);
  std::vector<Level> ten_est(10, 2);
  std::vector<NodeId> ten_nodes(10);
  std::iota(ten_nodes.begin(), ten_nodes.end(), NodeId{0});
  ten_est[1] = ten_est[4] = ten_est[8] = 3;
  CHECK(node_level_recall(ten_nodes, ten_est, ten_truth) == doctest::Approx(0.7));

  const std::vector<Level> unreached{1, kUnreached};
  CHECK_THROWS_AS(node_level_recall(std::vector<NodeId>{1}, std::vector<Level>{2}, unreached), DomainError);
}

TEST_CASE("spearman") {
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
  // ties get average ranks; value from the Pearson correlation of ranks
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 1, 2, 2}) ==
        doctest::Approx(0.8944271909999159));
  CHECK(std::isnan(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5})));
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.p = 0.05;
  CHECK_NOTHROW(c.validate());
  c.mean_degree = 50.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.mean_degree.reset();
  c.checkpoints = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.checkpoints = {0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.checkpoints = {5, 3};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.checkpoints = {5};
  c.repeats = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.repeats = 1;
  c.hidden_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("run_experiment is deterministic") {
  ExperimentConfig c;
  c.name = "det";
  c.n = 120;
  c.mean_degree = 12.0;
  c.checkpoints = {2, 5, 8};
  c.repeats = 2;
  c.hidden_fraction = 0.0;
  c.seed = 77;
  const auto a = run_experiment(c);
  c.threads = 3;
  const auto b = run_experiment(c);
  REQUIRE(a.points.size() == 6);
  REQUIRE(b.points.size() == 6);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].recall == b.points[i].recall);
    CHECK(a.points[i].fpr == b.points[i].fpr);
    CHECK(a.points[i].node_level_recall == b.points[i].node_level_recall);
    CHECK(a.points[i].reconstructed_edges == b.points[i].reconstructed_edges);
  }
  CHECK(a.weibull.shape == b.weibull.shape);
  CHECK(a.summary.size() == 3);
  CHECK(a.at(5).cascades == 5);
  CHECK_THROWS_AS(a.at(4), DomainError);
  CHECK(a.at(8).recall.min <= a.at(8).recall.mean);
  CHECK(a.at(8).recall.mean <= a.at(8).recall.max);
}

TEST_CASE("fixed hidden nodes never appear") {
  ExperimentConfig c;
  c.n = 100;
  c.p = 0.1;
  c.checkpoints = {4};
  c.repeats = 1;
  c.hidden_fraction = 0.3;
  c.hiding = HidingMode::fixed_nodes;
  const auto r = run_experiment(c);
  CHECK(r.observed_nodes <= 4 * 70);
}

TEST_CASE("presets are well formed") {
  for (const auto& name : preset_names()) {
    const auto configs = preset_experiments(name);
    CHECK_FALSE(configs.empty());
    for (const auto& c : configs) CHECK_NOTHROW(c.validate());
  }
  CHECK_THROWS_AS(preset_experiments("nope"), ConfigError);
  const auto fig4 = preset_experiments("fig4").front();
  CHECK(fig4.n == 1000);
  CHECK(*fig4.p == 0.05);
  CHECK(fig4.cascades() == 30);
  CHECK(preset_experiments("fig1").size() == 15);
}

TEST_CASE("smoke preset finishes quickly") {
  auto c = preset_experiments("smoke").front();
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_experiment(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 60.0);
  CHECK(r.points.size() == c.checkpoints.size());
}
