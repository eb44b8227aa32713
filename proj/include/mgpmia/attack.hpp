#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"
#include "mgpmia/mlp.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

struct AttackExample {
  NodeId node = 0;  // id within the split graph it came from
  int label = 0;    // 1 member (shadow train), 0 non-member (shadow test)
  std::vector<double> feature;
  friend bool operator==(const AttackExample&, const AttackExample&) = default;
};

struct AttackDataset {
  std::size_t m = 0;  // samples per side; features have length 2m
  std::vector<AttackExample> examples;
  std::size_t skipped_train = 0;
  std::size_t skipped_test = 0;

  DenseMatrix feature_matrix() const;
  std::vector<int> labels() const;
};

// Similarity features of every node of the shadow train graph (label 1) and
// shadow test graph (label 0) under the shadow model. Nodes without an
// admissible positive are skipped; more than half skipped is an error.
AttackDataset build_attack_dataset(const VictimModel& shadow_model, const Graph& train_graph,
                                   std::span<const NodeId> train_nodes, const Graph& test_graph,
                                   std::span<const NodeId> test_nodes, std::size_t m,
                                   std::uint64_t seed);

// Similarity features (positives then negatives) of nodes under model.
// Skipped nodes are reported through `skipped`.
std::vector<AttackExample> similarity_features(const VictimModel& model, const Graph& graph,
                                               std::span<const NodeId> nodes, std::size_t m,
                                               std::uint64_t seed, std::vector<NodeId>* skipped);

// Header `node,label,s1..s2m`, values with 9 significant digits.
void write_attack_dataset_csv(std::ostream& out, const AttackDataset& dataset);

struct ClassifierConfig {
  std::size_t hidden = kDefaultMlpHidden;
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
};

// Two-layer MLP over z-scored features (statistics from the training set).
struct AttackModel {
  Mlp mlp;
  std::vector<double> feature_mean{};
  std::vector<double> feature_scale{};
  double train_accuracy = 0.0;

  std::size_t input_dim() const { return mlp.input_dim(); }
  // Untrained model with every weight zero and identity scaling.
  static AttackModel zeros(std::size_t input_dim, std::size_t hidden = kDefaultMlpHidden);
};

struct Prediction {
  NodeId node = 0;
  int label = 0;
  double score = 0.5;  // softmax probability of membership
  bool skipped = false;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Full-batch Adam on cross-entropy. Both labels must be present.
AttackModel train_classifier(const DenseMatrix& features, std::span<const int> labels,
                             const ClassifierConfig& config, std::uint64_t seed);
AttackModel train_attack_model(const AttackDataset& dataset, const ClassifierConfig& config,
                               std::uint64_t seed);

// Ties between the two logits go to non-member.
Prediction classify(const AttackModel& model, NodeId node, std::span<const double> feature);

// Attacker-labeled shadow data: every node of `train` is a member of the
// shadow model's training data, every node of `test` is not.
struct ShadowSplit {
  Graph train;
  Graph test;
};

// Ground-truth target side: the target's member graph and the held-out graph.
struct EvaluationSplit {
  Graph member_graph;
  Graph nonmember_graph;
};

struct SplitPredictions {
  std::vector<Prediction> members{};
  std::vector<Prediction> nonmembers{};
  std::size_t skipped = 0;
};

std::vector<NodeId> all_nodes(const Graph& graph);

// Queries the target model for similarity features of each node and
// classifies them. Nodes without a positive get label 0, score 0.5.
std::vector<Prediction> infer_membership(const AttackModel& attack, const VictimModel& target,
                                         const Graph& graph, std::span<const NodeId> nodes,
                                         std::size_t m, std::uint64_t seed);

// infer_membership over both halves of an evaluation split.
SplitPredictions infer_split(const AttackModel& attack, const VictimModel& target,
                             const EvaluationSplit& split, std::size_t m, std::uint64_t seed);

}  // namespace mgpmia
