#include "mgpmia/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "mgpmia/adam.hpp"
#include "mgpmia/amplify.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

DenseMatrix AttackDataset::feature_matrix() const {
  DenseMatrix out(examples.size(), 2 * m);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    std::copy(examples[i].feature.begin(), examples[i].feature.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> AttackDataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

std::vector<AttackExample> similarity_features(const VictimModel& model, const Graph& graph,
                                               std::span<const NodeId> nodes, std::size_t m,
                                               std::uint64_t seed, std::vector<NodeId>* skipped) {
  const SampleSet samples = sample_nodes(graph, nodes, model.objective(), m, m, seed);
  if (skipped != nullptr) *skipped = samples.skipped;
  std::vector<AttackExample> out;
  for (const SimilarityVector& sv : similarity_profile(model, graph, samples)) {
    out.push_back({.node = sv.node, .label = 0, .feature = sv.concat()});
  }
  return out;
}

AttackDataset build_attack_dataset(const VictimModel& shadow_model, const Graph& train_graph,
                                   std::span<const NodeId> train_nodes, const Graph& test_graph,
                                   std::span<const NodeId> test_nodes, std::size_t m,
                                   std::uint64_t seed) {
  if (m < 1) throw ConfigError("attack needs m >= 1");
  if (train_nodes.empty() || test_nodes.empty()) {
    throw DegenerateInputError("attack dataset needs non-empty shadow train and test node sets");
  }
  const Rng root(seed);
  AttackDataset ds;
  ds.m = m;
  std::vector<NodeId> skipped;
  for (auto& e : similarity_features(shadow_model, train_graph, train_nodes, m, root.split("train").seed(), &skipped)) {
    e.label = 1;
    ds.examples.push_back(std::move(e));
  }
  ds.skipped_train = skipped.size();
  for (auto& e : similarity_features(shadow_model, test_graph, test_nodes, m, root.split("test").seed(), &skipped)) {
    e.label = 0;
    ds.examples.push_back(std::move(e));
  }
  ds.skipped_test = skipped.size();
  const std::size_t total = train_nodes.size() + test_nodes.size();
  if (2 * (ds.skipped_train + ds.skipped_test) > total) {
    throw DataQualityError("attack dataset skipped " + std::to_string(ds.skipped_train + ds.skipped_test) +
                           " of " + std::to_string(total) + " nodes");
  }
  return ds;
}

void write_attack_dataset_csv(std::ostream& out, const AttackDataset& dataset) {
  out << "node,label";
  for (std::size_t i = 1; i <= 2 * dataset.m; ++i) out << ",s" << i;
  out << '\n';
  char buf[32];
  for (const auto& e : dataset.examples) {
    out << e.node << ',' << e.label;
    for (double v : e.feature) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

AttackModel AttackModel::zeros(std::size_t input_dim, std::size_t hidden) {
  AttackModel m{.mlp = Mlp::zeros(input_dim, hidden, 2)};
  m.feature_mean.assign(input_dim, 0.0);
  m.feature_scale.assign(input_dim, 1.0);
  return m;
}

namespace {

DenseMatrix standardize(const DenseMatrix& x, const AttackModel& model) {
  DenseMatrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - model.feature_mean[j]) / model.feature_scale[j];
  }
  return out;
}

}  // namespace

AttackModel train_classifier(const DenseMatrix& features, std::span<const int> labels,
                             const ClassifierConfig& config, std::uint64_t seed) {
  if (labels.size() != features.rows()) throw ShapeError("classifier: label count mismatch");
  bool has0 = false;
  bool has1 = false;
  for (int l : labels) {
    if (l != 0 && l != 1) throw RangeError("classifier labels must be 0 or 1");
    (l == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw TrainingError("attack training data contains a single class");

  Rng rng(seed);
  AttackModel model{.mlp = Mlp::init(features.cols(), config.hidden, 2, rng)};
  const std::size_t d = features.cols();
  const auto n = static_cast<double>(features.rows());
  model.feature_mean.assign(d, 0.0);
  model.feature_scale.assign(d, 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) model.feature_mean[j] += features(i, j) / n;
  }
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = features(i, j) - model.feature_mean[j];
      model.feature_scale[j] += c * c / n;
    }
  }
  for (double& s : model.feature_scale) s = std::sqrt(s) > 1e-12 ? std::sqrt(s) : 1.0;

  const DenseMatrix x = standardize(features, model);
  AdamState adam(model.mlp.params(), {.learning_rate = config.learning_rate});
  ParamSet grads = model.mlp.params().zeros_like();
  MlpCache cache;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    grads.set_zero();
    const DenseMatrix logits = model.mlp.forward(x, &cache);
    DenseMatrix grad_logits(logits.rows(), logits.cols());
    cross_entropy(logits, labels, &grad_logits);
    model.mlp.backward(cache, grad_logits, grads);
    adam_step(adam, model.mlp.params(), grads);
  }
  const DenseMatrix logits = model.mlp.forward(x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const int predicted = logits(i, 1) > logits(i, 0) ? 1 : 0;
    correct += predicted == labels[i] ? 1 : 0;
  }
  model.train_accuracy = static_cast<double>(correct) / n;
  return model;
}

AttackModel train_attack_model(const AttackDataset& dataset, const ClassifierConfig& config,
                               std::uint64_t seed) {
  return train_classifier(dataset.feature_matrix(), dataset.labels(), config, seed);
}

Prediction classify(const AttackModel& model, NodeId node, std::span<const double> feature) {
  if (feature.size() != model.input_dim()) {
    throw ShapeError("attack model expects " + std::to_string(model.input_dim()) + " features, got " +
                     std::to_string(feature.size()));
  }
  std::vector<double> x(feature.begin(), feature.end());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - model.feature_mean[j]) / model.feature_scale[j];
  const auto logits = model.mlp.forward(x);
  // Keep the score strictly inside (0, 1) even when the sigmoid saturates.
  const double score = std::clamp(sigmoid(logits[1] - logits[0]), std::numeric_limits<double>::min(),
                                  std::nextafter(1.0, 0.0));
  return {.node = node, .label = logits[1] > logits[0] ? 1 : 0, .score = score};
}

std::vector<Prediction> infer_membership(const AttackModel& attack, const VictimModel& target,
                                         const Graph& graph, std::span<const NodeId> nodes,
                                         std::size_t m, std::uint64_t seed) {
  if (attack.input_dim() != 2 * m) {
    throw ShapeError("attack model input width " + std::to_string(attack.input_dim()) +
                     " does not match 2m = " + std::to_string(2 * m));
  }
  std::vector<NodeId> skipped;
  const auto features = similarity_features(target, graph, nodes, m, seed, &skipped);
  std::vector<Prediction> out;
  out.reserve(features.size() + skipped.size());
  for (const auto& e : features) out.push_back(classify(attack, e.node, e.feature));
  for (NodeId v : skipped) out.push_back({.node = v, .label = 0, .score = 0.5, .skipped = true});
  std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) { return a.node < b.node; });
  return out;
}

std::vector<NodeId> all_nodes(const Graph& graph) {
  std::vector<NodeId> nodes(graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  return nodes;
}

SplitPredictions infer_split(const AttackModel& attack, const VictimModel& target,
                             const EvaluationSplit& split, std::size_t m, std::uint64_t seed) {
  const Rng root(seed);
  SplitPredictions out;
  out.members = infer_membership(attack, target, split.member_graph, all_nodes(split.member_graph), m,
                                 root.split("members").seed());
  out.nonmembers = infer_membership(attack, target, split.nonmember_graph,
                                    all_nodes(split.nonmember_graph), m, root.split("nonmembers").seed());
  for (const auto* side : {&out.members, &out.nonmembers}) {
    for (const Prediction& p : *side) out.skipped += p.skipped ? 1 : 0;
  }
  return out;
}

}  // namespace mgpmia
