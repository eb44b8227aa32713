#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mgpmia/diagnostics.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/experiment.hpp"
#include "mgpmia/metrics.hpp"
#include "test_util.hpp"

namespace mgpmia {
namespace {

LabelMap labels(std::initializer_list<int> values) {
  LabelMap m;
  NodeId i = 0;
  for (int v : values) m[i++] = v;
  return m;
}

TEST(MetricsTest, HandExamples) {
  const MetricsReport perfect = accuracy_f1(labels({1, 0, 1}), labels({1, 0, 1}));
  EXPECT_EQ(perfect.acc, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  // tp=2, fp=1, fn=1, tn=2.
  const MetricsReport r = accuracy_f1(labels({1, 1, 1, 0, 0, 0}), labels({1, 1, 0, 1, 0, 0}));
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_EQ(r.tn, 2u);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.acc, 4.0 / 6.0);
  EXPECT_EQ(r.n_members, 3u);
  EXPECT_EQ(r.n_nonmembers, 3u);
  const MetricsReport none = accuracy_f1(labels({0, 0, 0}), labels({1, 0, 1}));
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_THROW(accuracy_f1(labels({1, 0}), labels({1, 0, 1})), ConfigError);
}

TEST(MetricsTest, ExhaustiveEightNodeOracle) {
  for (int p = 0; p < 256; ++p) {
    for (int t = 0; t < 256; ++t) {
      LabelMap pred;
      LabelMap truth;
      int tp = 0;
      int fp = 0;
      int tn = 0;
      int fn = 0;
      for (int i = 0; i < 8; ++i) {
        const int a = (p >> i) & 1;
        const int b = (t >> i) & 1;
        pred[static_cast<NodeId>(i)] = a;
        truth[static_cast<NodeId>(i)] = b;
        tp += a & b;
        fp += a & (1 - b);
        fn += (1 - a) & b;
        tn += (1 - a) & (1 - b);
      }
      const MetricsReport r = accuracy_f1(pred, truth);
      ASSERT_EQ(r.tp, static_cast<std::size_t>(tp));
      ASSERT_EQ(r.fp, static_cast<std::size_t>(fp));
      ASSERT_EQ(r.tn, static_cast<std::size_t>(tn));
      ASSERT_EQ(r.fn, static_cast<std::size_t>(fn));
      ASSERT_EQ(r.acc, static_cast<double>(tp + tn) / 8.0);
      const double f1 = (tp + fp == 0 || tp + fn == 0) ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
      ASSERT_NEAR(r.f1, f1, 1e-15);
    }
  }
}

TEST(MetricsTest, KeyPredictionsUsesOriginalIds) {
  SplitPredictions sp;
  sp.members = {{.node = 0, .label = 1}, {.node = 1, .label = 0}};
  sp.nonmembers = {{.node = 0, .label = 1}};
  const std::vector<NodeId> member_ids = {10, 4};
  const std::vector<NodeId> nonmember_ids = {7};
  const KeyedOutcome k = key_predictions(sp, member_ids, nonmember_ids);
  EXPECT_EQ(k.predictions, (LabelMap{{4, 0}, {7, 1}, {10, 1}}));
  EXPECT_EQ(k.truth, (LabelMap{{4, 1}, {7, 0}, {10, 1}}));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(PcaTest, LineHasRankOne) {
  DenseMatrix x(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 2.0 * static_cast<double>(i) + 1.0;
  }
  const PcaResult r = pca_project(x, 2);
  ASSERT_EQ(r.explained_variance_ratio.size(), 2u);
  EXPECT_NEAR(r.explained_variance_ratio[0], 1.0, 1e-10);
  EXPECT_NEAR(r.explained_variance_ratio[1], 0.0, 1e-10);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.components.rows(), 1u);
  EXPECT_GT(r.components(0, 0), 0.0);
}

TEST(PcaTest, IsotropicGaussianSplitsVariance) {
  Rng rng(1);
  DenseMatrix x(1000, 2);
  for (double& v : x.values()) v = rng.normal();
  const PcaResult r = pca_project(x, 2);
  EXPECT_NEAR(r.explained_variance_ratio[0], 0.5, 0.1);
  EXPECT_NEAR(r.explained_variance_ratio[1], 0.5, 0.1);
  EXPECT_FALSE(r.rank_deficient);
}

TEST(PcaTest, SubspaceDataKeepsDistancesAndOrthonormalComponents) {
  Rng rng(2);
  // Points in the span of two fixed directions of R^6.
  const DenseMatrix basis = testing::random_matrix(2, 6, rng);
  DenseMatrix coeffs(30, 2);
  for (double& v : coeffs.values()) v = rng.uniform(-3.0, 3.0);
  const DenseMatrix x = matmul(coeffs, basis);
  const PcaResult r = pca_project(x, 2);
  ASSERT_EQ(r.projection.rows(), 30u);
  ASSERT_EQ(r.projection.cols(), 2u);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = i + 1; j < 30; ++j) {
      double d_in = 0.0;
      double d_out = 0.0;
      for (std::size_t c = 0; c < 6; ++c) d_in += std::pow(x(i, c) - x(j, c), 2);
      for (std::size_t c = 0; c < 2; ++c) d_out += std::pow(r.projection(i, c) - r.projection(j, c), 2);
      EXPECT_NEAR(std::sqrt(d_in), std::sqrt(d_out), 1e-8);
    }
  }
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      EXPECT_NEAR(dot(r.components.row(a), r.components.row(b)), a == b ? 1.0 : 0.0, 1e-8);
    }
  }
  EXPECT_THROW(pca_project(x, 0), RangeError);
  EXPECT_THROW(pca_project(DenseMatrix(1, 3), 2), RangeError);
}

TEST(PcaTest, EigenpairsOfDiagonalMatrix) {
  DenseMatrix d(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 5.0;
  d(2, 2) = 3.0;
  const auto pairs = top_eigenpairs(d, 3);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_NEAR(pairs[0].value, 5.0, 1e-9);
  EXPECT_NEAR(pairs[1].value, 3.0, 1e-9);
  EXPECT_NEAR(pairs[2].value, 1.0, 1e-9);
  EXPECT_NEAR(pairs[0].vector[1], 1.0, 1e-6);
}

TEST(RobustnessTest, ZeroBudgetAndIsolatedComponent) {
  Rng rng(3);
  // A dense component on nodes 0..19 plus a separate triangle on 20..22.
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 20; ++i) {
    for (NodeId j = i + 1; j < 20; ++j) {
      if (rng.bernoulli(0.4)) edges.push_back({i, j});
    }
  }
  edges.push_back({20, 21});
  edges.push_back({21, 22});
  edges.push_back({20, 22});
  const Graph g = testing::make_graph(23, edges, 4, rng);
  const VictimModel m = VictimModel::initialize(
      std::vector<DomainSpec>{{0, 4}}, EncoderDims{.shared_dim = 8, .hidden_dim = 8, .emb_dim = 8}, SslObjective{}, 4);
  for (double s : robustness_probe(m, g, all_nodes(g), 0.0, 3, 5)) EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(kRobustnessBudget, 0.15);

  // Find a seed whose perturbations never touch the triangle, then the
  // triangle's embeddings (and similarities) must be unchanged.
  const std::vector<NodeId> triangle = {20, 21, 22};
  constexpr std::size_t kTrials = 3;
  auto untouched = [&](std::uint64_t seed) {
    for (std::size_t t = 0; t < kTrials; ++t) {
      const Graph p = perturb_edges(g, kRobustnessBudget, derive_seed(seed, t));
      for (NodeId v : triangle) {
        const auto a = p.neighbors(v);
        const auto b = g.neighbors(v);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
      }
    }
    return true;
  };
  std::uint64_t seed = 0;
  while (!untouched(seed)) ++seed;
  const auto sims = robustness_probe(m, g, triangle, kRobustnessBudget, kTrials, seed);
  for (double s : sims) EXPECT_NEAR(s, 1.0, 1e-12);
  const auto all = robustness_probe(m, g, all_nodes(g), kRobustnessBudget, kTrials, seed);
  EXPECT_LT(*std::min_element(all.begin(), all.begin() + 20), 1.0 - 1e-9);
}

TEST(RobustnessTest, SummaryStatistics) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const DistributionSummary s = summarize(v);
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.max, 4.0);
}

ExperimentConfig tiny_config() {
  KeyValues kv = {{"epochs_pretrain", "5"},   {"epochs_augment", "2"},  {"epochs_unlearn", "3"},
                  {"epochs_shadow", "3"},     {"epochs_attack", "10"},  {"shared_dim", "8"},
                  {"hidden_dim", "8"},        {"emb_dim", "8"},         {"attack_hidden", "16"},
                  {"m_samples", "2"},         {"repetitions", "2"},     {"synthetic.nodes", "60"},
                  {"synthetic.shadow_nodes", "60"}, {"synthetic.feature_dim", "6"},
                  {"baseline.k_perturb", "3"}, {"baseline.ft_epochs", "2"}, {"workers", "1"}};
  return config_from_key_values(kv);
}

TEST(ConfigTest, ParsingAndValidation) {
  const ExperimentConfig c = tiny_config();
  EXPECT_EQ(c.epochs_pretrain, 5u);
  EXPECT_EQ(c.seeds(), (std::vector<std::uint64_t>{0, 1}));
  EXPECT_EQ(ExperimentConfig{}.repetitions, 5u);
  EXPECT_EQ(ExperimentConfig{}.unlearn.lambda, 1.0);
  EXPECT_THROW(config_from_key_values({{"bogus", "1"}}), ConfigError);
  EXPECT_THROW(config_from_key_values({{"repetitions", "0"}}), ConfigError);
  EXPECT_THROW(config_from_key_values({{"lambda", "-1"}}), ConfigError);
  EXPECT_THROW(config_from_key_values({{"attacks", "mgp-mia,unknown"}}), ConfigError);
  EXPECT_THROW(config_from_key_values({{"objective", "triplet"}}), ConfigError);
  EXPECT_THROW(config_from_key_values({{"dataset.0.edges", "/nonexistent/e.txt"},
                                       {"dataset.0.features", "/nonexistent/f.txt"}}),
               ConfigError);
}

TEST(ConfigTest, CanonicalFormRoundTripsAndHashIsStable) {
  const ExperimentConfig c = tiny_config();
  const ExperimentConfig back = config_from_key_values(config_to_key_values(c));
  EXPECT_EQ(config_to_key_values(back), config_to_key_values(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  ExperimentConfig w = c;
  w.workers = 4;
  EXPECT_EQ(config_hash(w), config_hash(c));
  ExperimentConfig l = c;
  l.unlearn.lambda = 2.0;
  EXPECT_NE(config_hash(l), config_hash(c));
}

TEST(ConfigTest, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "mgpmia_config_test.conf";
  {
    std::ofstream out(path);
    out << "# comment\nobjective = contrastive\nlambda = 0.5\nattacks = mgp-mia, ge\n";
  }
  const ExperimentConfig c = load_config(path);
  EXPECT_EQ(c.objective.kind, ObjectiveKind::kContrastive);
  EXPECT_EQ(c.unlearn.lambda, 0.5);
  EXPECT_EQ(c.attacks, (std::vector<std::string>{"mgp-mia", "ge"}));
  std::filesystem::remove(path);
}

TEST(ExperimentTest, NamesAndVariants) {
  EXPECT_EQ(attack_display_name("wo-ul"), "mgp-mia");
  EXPECT_EQ(attack_variant("wo-il"), "wo-il");
  EXPECT_EQ(attack_variant("mgp-mia"), "full");
  EXPECT_EQ(attack_display_name("gpia"), "gpia");
  EXPECT_EQ(attack_display_name("nlo"), "nlo-mia");
  EXPECT_EQ(attack_variant("ge"), "baseline");
}

std::string serialize(const ExperimentResult& r) {
  std::string out;
  for (const RunReport& rep : r.reports) out += report_json(rep) + "\n";
  return out;
}

TEST(ExperimentTest, RunsAreDeterministicAndConsistent) {
  const ExperimentConfig c = tiny_config();
  const ExperimentResult a = run_experiment(c);
  ASSERT_TRUE(a.failures.empty()) << a.failures.front().error;
  ASSERT_EQ(a.reports.size(), 2u * c.attacks.size());
  EXPECT_EQ(a.amplification.size(), 2u);
  for (const RunReport& r : a.reports) {
    const MetricsReport& m = r.metrics;
    EXPECT_EQ(m.acc, static_cast<double>(m.tp + m.tn) / static_cast<double>(m.tp + m.tn + m.fp + m.fn));
    EXPECT_EQ(m.tp + m.fn, m.n_members);
    EXPECT_EQ(m.n_members, 30u);
    EXPECT_EQ(r.config_hash, a.config_hash);
  }
  ExperimentConfig threaded = c;
  threaded.workers = 2;
  EXPECT_EQ(serialize(run_experiment(threaded)), serialize(a));
  EXPECT_EQ(a.summary.size(), c.attacks.size());
}

TEST(ExperimentTest, ReportJsonHasExactlyTheReportFields) {
  RunReport r{.metrics = {.acc = 0.5, .f1 = 0.25, .tp = 1, .n_members = 2, .seed = 3, .attack = "ge-mia"},
              .variant = "baseline",
              .config_hash = "abc"};
  EXPECT_EQ(report_json(r),
            R"({"acc":0.5,"f1":0.25,"tp":1,"fp":0,"tn":0,"fn":0,"n_members":2,"n_nonmembers":0,)"
            R"("seed":3,"attack":"ge-mia","variant":"baseline","config_hash":"abc"})");
}

TEST(ExperimentTest, StageErrorsBecomeFailureRecords) {
  ExperimentConfig c = tiny_config();
  // 12-node domains leave 6 evaluation nodes per side, short of GE's 20 references.
  c.synthetic->nodes = 12;
  c.synthetic->shadow_nodes = 40;
  c.attacks = {"embed", "ge"};
  const ExperimentResult r = run_experiment(c);
  EXPECT_TRUE(r.reports.empty());
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.failures[0].seed, 0u);
  EXPECT_EQ(r.failures[1].seed, 1u);
  EXPECT_EQ(r.failures[0].stage, "ge");
  EXPECT_NE(r.failures[0].error.find("references"), std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "mgpmia_failures_test";
  write_experiment(dir, r);
  std::ifstream in(dir / "failures.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2u);
  std::filesystem::remove_all(dir);
}

TEST(ScalingTest, SlopeAndValidation) {
  const std::vector<ScalingPoint> linear = {{100, 1.0}, {200, 2.0}, {400, 4.0}};
  EXPECT_NEAR(loglog_slope(linear), 1.0, 1e-12);
  const std::vector<ScalingPoint> quadratic = {{10, 1.0}, {20, 4.0}, {40, 16.0}};
  EXPECT_NEAR(loglog_slope(quadratic), 2.0, 1e-12);
  const std::vector<std::size_t> with_zero = {0, 100};
  EXPECT_THROW(runtime_scaling_check(with_zero, tiny_config()), RangeError);
  const std::vector<std::size_t> single = {100};
  EXPECT_THROW(runtime_scaling_check(single, tiny_config()), RangeError);
}

}  // namespace
}  // namespace mgpmia
