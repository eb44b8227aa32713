#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "mgpmia/adam.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/gcn.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/mlp.hpp"
#include "mgpmia/params.hpp"
#include "test_util.hpp"

namespace mgpmia {
namespace {

using testing::max_fd_error;
using testing::random_matrix;

// Dense oracle for the normalized adjacency with self-loops.
DenseMatrix dense_normalized_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  DenseMatrix a(n, n);
  for (NodeId u = 0; u < n; ++u) {
    a(u, u) = 1.0;
    for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
  }
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i] += a(i, j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= std::sqrt(d[i] * d[j]);
  }
  return a;
}

DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

void expect_near(const DenseMatrix& a, const DenseMatrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], tol) << "entry " << i;
}

DenseMatrix dense_gcn_oracle(const Graph& g, const DenseMatrix& x, const std::vector<DenseMatrix>& weights) {
  const DenseMatrix a = dense_normalized_adjacency(g);
  DenseMatrix h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = naive_matmul(naive_matmul(a, h), weights[l]);
    if (l + 1 < weights.size()) {
      for (double& v : h.values()) v = std::max(v, 0.0);
    }
  }
  return h;
}

TEST(MatrixTest, ProductsAgreeWithNaiveOracle) {
  Rng rng(1);
  const DenseMatrix a = random_matrix(4, 3, rng);
  const DenseMatrix b = random_matrix(3, 5, rng);
  const DenseMatrix c = random_matrix(4, 5, rng);
  expect_near(matmul(a, b), naive_matmul(a, b), 1e-12);
  expect_near(matmul_tn(a, c), naive_matmul(transpose(a), c), 1e-12);
  expect_near(matmul_nt(a, transpose(b)), naive_matmul(a, b), 1e-12);
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(GcnTest, IsolatedNodeIdentityLayer) {
  Rng rng(1);
  const Graph g = testing::make_graph(1, {}, 3, rng);
  const std::vector<DenseMatrix> w = {DenseMatrix::identity(3)};
  const DenseMatrix out = gcn_forward(w, Propagator::from_graph(g), g.features());
  EXPECT_EQ(out, g.features());
}

TEST(GcnTest, IsomorphicNodesGetIdenticalRows) {
  Rng rng(2);
  // Star center 0 with leaves 1 and 2 that share features.
  DenseMatrix x = random_matrix(3, 4, rng);
  std::copy(x.row(1).begin(), x.row(1).end(), x.row(2).begin());
  const std::vector<Edge> edges = {{0, 1}, {0, 2}};
  const Graph g = Graph::from_edges(3, edges, x, 0);
  const GcnEncoder enc = GcnEncoder::init(std::vector<std::size_t>{4, 5, 3}, rng);
  const DenseMatrix out = enc.forward(g, g.features());
  for (std::size_t j = 0; j < out.cols(); ++j) EXPECT_EQ(out(1, j), out(2, j));
}

TEST(GcnTest, ThreeNodePathMatchesDenseOracle) {
  Rng rng(3);
  const Graph g = testing::path_graph(3, 4, rng);
  const std::vector<DenseMatrix> w = {random_matrix(4, 2, rng)};
  expect_near(gcn_forward(w, Propagator::from_graph(g), g.features()), dense_gcn_oracle(g, g.features(), w), 1e-10);
}

TEST(GcnTest, RandomGraphsMatchDenseOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.below(19);
    const Graph g = testing::random_connected_graph(n, 0.2, 5, rng);
    const std::vector<DenseMatrix> w = {random_matrix(5, 6, rng), random_matrix(6, 4, rng), random_matrix(4, 3, rng)};
    expect_near(gcn_forward(w, Propagator::from_graph(g), g.features()), dense_gcn_oracle(g, g.features(), w), 1e-10);
  }
}

TEST(GcnTest, ShapeMismatchAndNonFiniteRejected) {
  Rng rng(5);
  const Graph g = testing::path_graph(3, 4, rng);
  const std::vector<DenseMatrix> bad = {random_matrix(3, 2, rng)};
  EXPECT_THROW(gcn_forward(bad, Propagator::from_graph(g), g.features()), ShapeError);
  std::vector<DenseMatrix> w = {random_matrix(4, 2, rng)};
  w[0](0, 0) = std::nan("");
  EXPECT_THROW(gcn_forward(w, Propagator::from_graph(g), g.features()), NumericError);
}

TEST(GcnTest, LocalViewReproducesFullGraphRows) {
  Rng rng(6);
  const Graph g = testing::random_connected_graph(40, 0.05, 4, rng);
  const std::vector<DenseMatrix> w = {random_matrix(4, 6, rng), random_matrix(6, 3, rng)};
  const DenseMatrix full = gcn_forward(w, Propagator::from_graph(g), g.features());
  LocalViewBuilder builder(g);
  for (NodeId seed : {NodeId{0}, NodeId{17}, NodeId{39}}) {
    const std::vector<NodeId> seeds = {seed};
    const LocalView view = builder.build(seeds, w.size());
    const DenseMatrix local = gcn_forward(w, view.propagator, view.features);
    for (std::size_t j = 0; j < full.cols(); ++j) {
      EXPECT_NEAR(local(view.seed_rows[0], j), full(seed, j), 1e-12);
    }
  }
}

TEST(GcnTest, BackwardMatchesFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = testing::random_connected_graph(3 + rng.below(8), 0.3, 4, rng);
    std::vector<DenseMatrix> w = {random_matrix(4, 5, rng), random_matrix(5, 3, rng)};
    const Propagator prop = Propagator::from_graph(g);
    DenseMatrix x = g.features();
    const DenseMatrix probe = random_matrix(g.num_nodes(), 3, rng);
    auto f = [&] {
      const DenseMatrix out = gcn_forward(w, prop, x);
      return dot(out.values(), probe.values());
    };
    GcnCache cache;
    gcn_forward(w, prop, x, &cache);
    std::vector<DenseMatrix> grads = {DenseMatrix(4, 5), DenseMatrix(5, 3)};
    const DenseMatrix gx = gcn_backward(w, prop, cache, probe, grads, true);
    for (std::size_t l = 0; l < w.size(); ++l) {
      EXPECT_LT(max_fd_error(w[l].values(), grads[l].values(), f), 1e-4) << "layer " << l;
    }
    EXPECT_LT(max_fd_error(x.values(), gx.values(), f), 1e-4);
  }
}

TEST(CosineTest, Examples) {
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {2.0, 1.0};
  EXPECT_NEAR(cosine_sim(a, b), 0.8, 1e-15);
  EXPECT_NEAR(cosine_sim(a, a), 1.0, 1e-15);
  EXPECT_EQ(cosine_sim(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
}

TEST(CosineTest, ZeroVectorIsFlaggedNotThrown) {
  bool degenerate = false;
  EXPECT_EQ(cosine_sim(std::vector<double>{0, 0}, std::vector<double>{1, 2}, &degenerate), 0.0);
  EXPECT_TRUE(degenerate);
  cosine_sim(std::vector<double>{1, 0}, std::vector<double>{1, 2}, &degenerate);
  EXPECT_FALSE(degenerate);
}

TEST(CosineTest, SymmetricAndScaleInvariant) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix m = random_matrix(2, 6, rng);
    std::vector<double> scaled(m.row(0).begin(), m.row(0).end());
    const double c = 0.01 + 10.0 * rng.uniform();
    for (double& v : scaled) v *= c;
    EXPECT_NEAR(cosine_sim(m.row(0), m.row(1)), cosine_sim(m.row(1), m.row(0)), 1e-15);
    EXPECT_NEAR(cosine_sim(scaled, m.row(1)), cosine_sim(m.row(0), m.row(1)), 1e-12);
  }
}

TEST(CosineTest, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  DenseMatrix m = random_matrix(2, 5, rng);
  DenseMatrix g(2, 5);
  add_cosine_grad(m.row(0), m.row(1), 1.0, g.row(0), g.row(1));
  EXPECT_LT(max_fd_error(m.values(), g.values(), [&] { return cosine_sim(m.row(0), m.row(1)); }), 1e-4);
}

TEST(MlpTest, ZeroWeightsGiveZeroLogits) {
  const Mlp mlp = Mlp::zeros(6, kDefaultMlpHidden, 2);
  EXPECT_EQ(mlp.hidden_dim(), 256u);
  const std::vector<double> logits = mlp.forward(std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(logits, (std::vector<double>{0.0, 0.0}));
}

TEST(MlpTest, HandComputedTwoByTwo) {
  Mlp mlp = Mlp::zeros(2, 2, 2);
  ParamSet& p = mlp.params();
  // w1 = I, b1 = (0, -1), w2 = [[1, 2], [3, 4]], b2 = (0.5, 0)
  p.at("mlp.w1") = DenseMatrix::identity(2);
  p.at("mlp.b1") = DenseMatrix(1, 2, std::vector<double>{0.0, -1.0});
  p.at("mlp.w2") = DenseMatrix(2, 2, std::vector<double>{1, 2, 3, 4});
  p.at("mlp.b2") = DenseMatrix(1, 2, std::vector<double>{0.5, 0.0});
  // x = (2, 3): hidden = relu(2, 2) = (2, 2); logits = (2 + 6 + 0.5, 4 + 8)
  EXPECT_EQ(mlp.forward(std::vector<double>{2, 3}), (std::vector<double>{8.5, 12.0}));
  // x = (-1, 0.5): hidden = relu(-1, -0.5) = 0; logits = b2
  EXPECT_EQ(mlp.forward(std::vector<double>{-1, 0.5}), (std::vector<double>{0.5, 0.0}));
  EXPECT_THROW(mlp.forward(std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(MlpTest, CrossEntropyBackwardMatchesFiniteDifferences) {
  Rng rng(10);
  Mlp mlp = Mlp::init(4, 8, 2, rng);
  const DenseMatrix x = random_matrix(7, 4, rng);
  const std::vector<int> labels = {0, 1, 1, 0, 1, 0, 0};
  auto f = [&] { return cross_entropy(mlp.forward(x), labels, nullptr); };
  MlpCache cache;
  const DenseMatrix logits = mlp.forward(x, &cache);
  DenseMatrix grad_logits(logits.rows(), logits.cols());
  cross_entropy(logits, labels, &grad_logits);
  ParamSet grads = mlp.params().zeros_like();
  mlp.backward(cache, grad_logits, grads);
  EXPECT_LT(max_fd_error(mlp.params(), grads, f), 1e-4);
}

TEST(LossTest, CrossEntropyUniformLogits) {
  const DenseMatrix logits(1, 2);
  const std::vector<int> label = {1};
  EXPECT_NEAR(cross_entropy(logits, label, nullptr), std::log(2.0), 1e-15);
}

TEST(LossTest, LinkPredictionZeroScoreIsLogTwo) {
  const DenseMatrix emb(4, 3);
  const std::vector<Edge> pos = {{0, 1}, {2, 3}};
  const std::vector<Edge> neg = {{0, 2}};
  EXPECT_NEAR(linkpred_loss(emb, pos, {}, nullptr), std::log(2.0), 1e-15);
  EXPECT_NEAR(linkpred_loss(emb, {}, neg, nullptr), std::log(2.0), 1e-15);
  EXPECT_NEAR(linkpred_loss(emb, pos, neg, nullptr), std::log(2.0), 1e-15);
}

TEST(LossTest, LinkPredictionGradient) {
  Rng rng(11);
  DenseMatrix emb = random_matrix(8, 5, rng);
  const std::vector<Edge> pos = {{0, 1}, {1, 2}, {3, 7}, {4, 5}};
  const std::vector<Edge> neg = {{0, 6}, {2, 5}, {1, 7}, {3, 4}};
  DenseMatrix g(8, 5);
  linkpred_loss(emb, pos, neg, &g);
  EXPECT_LT(max_fd_error(emb.values(), g.values(), [&] { return linkpred_loss(emb, pos, neg, nullptr); }), 1e-4);
}

TEST(LossTest, ContrastiveGradientFiveNodes) {
  Rng rng(12);
  DenseMatrix anchor = random_matrix(5, 4, rng);
  DenseMatrix positive = random_matrix(5, 4, rng);
  std::vector<ContrastiveTerm> terms;
  for (NodeId i = 0; i < 5; ++i) terms.push_back({i, i, {static_cast<NodeId>((i + 1) % 5), static_cast<NodeId>((i + 3) % 5)}});
  DenseMatrix ga(5, 4);
  DenseMatrix gp(5, 4);
  contrastive_loss(anchor, positive, terms, 0.5, &ga, &gp);
  auto f = [&] { return contrastive_loss(anchor, positive, terms, 0.5, nullptr, nullptr); };
  EXPECT_LT(max_fd_error(anchor.values(), ga.values(), f), 1e-4);
  EXPECT_LT(max_fd_error(positive.values(), gp.values(), f), 1e-4);
}

TEST(LossTest, ContrastiveMatchesInfoNceOracle) {
  Rng rng(13);
  const DenseMatrix anchor = random_matrix(3, 4, rng);
  const DenseMatrix positive = random_matrix(3, 4, rng);
  const std::vector<ContrastiveTerm> terms = {{0, 0, {1, 2}}};
  const double tau = 0.5;
  const double sp = cosine_sim(anchor.row(0), positive.row(0)) / tau;
  const double s1 = cosine_sim(anchor.row(0), anchor.row(1)) / tau;
  const double s2 = cosine_sim(anchor.row(0), anchor.row(2)) / tau;
  const double expected = -std::log(std::exp(sp) / (std::exp(sp) + std::exp(s1) + std::exp(s2)));
  EXPECT_NEAR(contrastive_loss(anchor, positive, terms, tau, nullptr, nullptr), expected, 1e-12);
}

TEST(LossTest, MseOnScoresGradient) {
  Rng rng(14);
  std::vector<DenseMatrix> views = {random_matrix(4, 3, rng), random_matrix(4, 3, rng)};
  const std::vector<ScoreTerm> terms = {{0, 0, 1, 0, 0.3}, {0, 1, 0, 2, -0.7}, {0, 3, 1, 3, 1.4}};
  std::vector<DenseMatrix> grads = {DenseMatrix(4, 3), DenseMatrix(4, 3)};
  mse_on_scores(views, terms, 3.0, grads);
  auto f = [&] { return mse_on_scores(views, terms, 3.0, {}); };
  for (std::size_t v = 0; v < views.size(); ++v) {
    EXPECT_LT(max_fd_error(views[v].values(), grads[v].values(), f), 1e-4);
  }
}

TEST(LossTest, NonFiniteLossNamesTerm) {
  DenseMatrix logits(2, 2);
  logits(1, 0) = std::numeric_limits<double>::infinity();
  const std::vector<int> labels = {0, 1};
  try {
    cross_entropy(logits, labels, nullptr);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

ParamSet scalar_params(double v) {
  ParamSet p;
  p.add("w", DenseMatrix(1, 1, v));
  return p;
}

TEST(AdamTest, ZeroGradientLeavesParamsAndCountsStep) {
  ParamSet p = scalar_params(1.5);
  AdamState state(p, {});
  adam_step(state, p, scalar_params(0.0));
  EXPECT_EQ(p[0](0, 0), 1.5);
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradientSign) {
  for (double g : {3.0, -0.25}) {
    ParamSet p = scalar_params(0.0);
    AdamState state(p, {.learning_rate = 0.01});
    adam_step(state, p, scalar_params(g));
    // m_hat / sqrt(v_hat) = g / |g| up to epsilon.
    EXPECT_NEAR(p[0](0, 0), -0.01 * (g > 0 ? 1.0 : -1.0), 1e-8);
  }
}

TEST(AdamTest, RunsAreBitIdentical) {
  auto run = [] {
    Rng rng(15);
    ParamSet p;
    p.add("a", random_matrix(3, 3, rng));
    AdamState state(p, {.learning_rate = 0.1});
    for (int i = 0; i < 20; ++i) {
      ParamSet g = p.zeros_like();
      for (std::size_t j = 0; j < 9; ++j) g[0].values()[j] = std::sin(p[0].values()[j] * (i + 1));
      adam_step(state, p, g);
    }
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, LayoutMismatchRejected) {
  ParamSet p = scalar_params(1.0);
  AdamState state(p, {});
  ParamSet wrong;
  wrong.add("w", DenseMatrix(1, 2));
  EXPECT_THROW(adam_step(state, p, wrong), ShapeError);
}

TEST(CheckpointTest, RoundTripAndByteLayout) {
  ParamSet p;
  p.add("ab", DenseMatrix(1, 2, std::vector<double>{1.0, -2.5}));
  std::stringstream buf;
  write_checkpoint(buf, p);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 2 + 2 + 4 + 4 + 16);
  EXPECT_EQ(bytes.substr(0, 4), "MGPM");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 1);  // parameter count
  EXPECT_EQ(bytes[12], 2);  // name length
  EXPECT_EQ(bytes.substr(14, 2), "ab");
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 24, 8);
  EXPECT_EQ(first, 1.0);
  buf.seekg(0);
  EXPECT_EQ(read_checkpoint(buf), p);
}

TEST(CheckpointTest, BadMagicRejected) {
  std::stringstream buf("NOPE....");
  EXPECT_THROW(read_checkpoint(buf), Error);
}

TEST(ParamSetTest, FlattenIsOrderStable) {
  Rng rng(16);
  ParamSet p;
  p.add("x", random_matrix(2, 3, rng));
  p.add("y", random_matrix(1, 4, rng));
  EXPECT_EQ(p.total_len(), 10u);
  const std::vector<double> flat = p.flatten();
  ParamSet q = p.zeros_like();
  q.assign_flat(flat);
  EXPECT_EQ(q, p);
  EXPECT_THROW(p.add("x", DenseMatrix(1, 1)), Error);
}

}  // namespace
}  // namespace mgpmia
