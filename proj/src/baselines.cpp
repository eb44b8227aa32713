#include "mgpmia/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "mgpmia/adam.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

constexpr std::array<BaselineKind, 6> kAll = {BaselineKind::kEmbedMia, BaselineKind::kGradMia,
                                              BaselineKind::kNloMia,   BaselineKind::kGloMia,
                                              BaselineKind::kGeMia,    BaselineKind::kGpia};

DenseMatrix stack_rows(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("feature tables have different widths");
  DenseMatrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

std::vector<Prediction> classify_rows(const AttackModel& model, const DenseMatrix& features) {
  std::vector<Prediction> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out.push_back(classify(model, static_cast<NodeId>(i), features.row(i)));
  }
  return out;
}

// Trains the MLP head on shadow features and applies it to target features.
SplitPredictions mlp_attack(const DenseMatrix& shadow_train, const DenseMatrix& shadow_test,
                            const DenseMatrix& target_members, const DenseMatrix& target_nonmembers,
                            const ClassifierConfig& config, std::uint64_t seed) {
  std::vector<int> labels(shadow_train.rows(), 1);
  labels.resize(shadow_train.rows() + shadow_test.rows(), 0);
  const AttackModel model = train_classifier(stack_rows(shadow_train, shadow_test), labels, config, seed);
  return {.members = classify_rows(model, target_members), .nonmembers = classify_rows(model, target_nonmembers)};
}

std::vector<double> row_means(const DenseMatrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    out[i] = r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  }
  return out;
}

std::vector<double> centroid(const DenseMatrix& emb, std::span<const NodeId> rows) {
  std::vector<double> c(emb.cols(), 0.0);
  for (NodeId r : rows) {
    const auto e = emb.row(r);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += e[j];
  }
  for (double& v : c) v /= static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  return c;
}

std::vector<NodeId> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kEmbedMia: return "embed";
    case BaselineKind::kGradMia: return "grad";
    case BaselineKind::kNloMia: return "nlo";
    case BaselineKind::kGloMia: return "glo";
    case BaselineKind::kGeMia: return "ge";
    case BaselineKind::kGpia: return "gpia";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view text) {
  for (BaselineKind k : kAll) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown baseline '" + std::string(text) + "' (expected embed, grad, nlo, glo, ge, gpia)");
}

std::span<const BaselineKind> all_baselines() { return kAll; }

void BaselineSpec::validate() const {
  if (k_perturb < 2) throw ConfigError("k_perturb must be >= 2");
  if (edge_fraction < 0.0 || edge_fraction > 1.0) throw ConfigError("edge_fraction must lie in [0, 1]");
  if (reference_count < 1) throw ConfigError("reference_count must be >= 1");
  if (ft_learning_rate < 0.0) throw ConfigError("ft_learning_rate must be >= 0");
}

DenseMatrix embedding_features(const VictimModel& model, const Graph& graph) { return embed(model, graph); }

SplitPredictions embed_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                           const VictimModel& target_model, const EvaluationSplit& eval,
                           const BaselineSpec& spec, std::uint64_t seed) {
  return mlp_attack(embedding_features(shadow_model, shadow.train), embedding_features(shadow_model, shadow.test),
                    embedding_features(target_model, eval.member_graph),
                    embedding_features(target_model, eval.nonmember_graph), spec.classifier, seed);
}

DenseMatrix gradient_features(const VictimModel& model, const Graph& graph, std::uint64_t seed) {
  NodeObjective objective(graph, model.objective(), model.dims().layers, seed);
  DenseMatrix out(graph.num_nodes(), graph.feature_dim());
  std::vector<double> g;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    objective.loss(model, v, nullptr, &g);
    for (double x : g) {
      if (!std::isfinite(x)) throw NumericError("Grad-MIA: non-finite gradient at node " + std::to_string(v));
    }
    std::copy(g.begin(), g.end(), out.row(v).begin());
  }
  return out;
}

SplitPredictions grad_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                          const VictimModel& target_model, const EvaluationSplit& eval,
                          const BaselineSpec& spec, std::uint64_t seed) {
  const Rng root(seed);
  return mlp_attack(gradient_features(shadow_model, shadow.train, root.split("shadow_train").seed()),
                    gradient_features(shadow_model, shadow.test, root.split("shadow_test").seed()),
                    gradient_features(target_model, eval.member_graph, root.split("members").seed()),
                    gradient_features(target_model, eval.nonmember_graph, root.split("nonmembers").seed()),
                    spec.classifier, root.split("mlp").seed());
}

std::vector<Graph> perturbation_set(const Graph& graph, std::size_t k, double edge_fraction,
                                    std::uint64_t seed) {
  std::vector<Graph> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(perturb_edges(graph, edge_fraction, derive_seed(seed, i)));
  return out;
}

DenseMatrix perturbation_features(const VictimModel& model, std::span<const Graph> perturbed) {
  if (perturbed.size() < 2) throw ConfigError("need at least two perturbed graphs");
  std::vector<DenseMatrix> emb;
  for (const Graph& g : perturbed) emb.push_back(embed(model, g));
  const std::size_t n = perturbed.front().num_nodes();
  const std::size_t k = perturbed.size();
  DenseMatrix out(n, k * (k - 1) / 2);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t col = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) out(v, col++) = cosine_sim(emb[i].row(v), emb[j].row(v));
    }
  }
  return out;
}

SplitPredictions nlo_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                         const VictimModel& target_model, const EvaluationSplit& eval,
                         const BaselineSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Rng root(seed);
  auto features = [&](const VictimModel& model, const Graph& g, std::string_view key) {
    return perturbation_features(model, perturbation_set(g, spec.k_perturb, spec.edge_fraction, root.split(key).seed()));
  };
  return mlp_attack(features(shadow_model, shadow.train, "shadow_train"), features(shadow_model, shadow.test, "shadow_test"),
                    features(target_model, eval.member_graph, "members"),
                    features(target_model, eval.nonmember_graph, "nonmembers"), spec.classifier,
                    root.split("mlp").seed());
}

ThresholdRule choose_threshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw ShapeError("choose_threshold: bad inputs");
  std::vector<double> grid(scores.begin(), scores.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  ThresholdRule best{.threshold = grid.front(), .accuracy = -1.0};
  for (double t : grid) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) correct += ((scores[i] >= t ? 1 : 0) == labels[i]) ? 1 : 0;
    const double acc = static_cast<double>(correct) / static_cast<double>(scores.size());
    if (acc > best.accuracy) best = {t, acc};
  }
  return best;
}

SplitPredictions glo_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                         const VictimModel& target_model, const EvaluationSplit& eval,
                         const BaselineSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Rng root(seed);
  auto mean_sims = [&](const VictimModel& model, const Graph& g, std::string_view key) {
    return row_means(perturbation_features(
        model, perturbation_set(g, spec.k_perturb, spec.edge_fraction, root.split(key).seed())));
  };
  std::vector<double> scores = mean_sims(shadow_model, shadow.train, "shadow_train");
  std::vector<int> labels(scores.size(), 1);
  const std::vector<double> test_scores = mean_sims(shadow_model, shadow.test, "shadow_test");
  scores.insert(scores.end(), test_scores.begin(), test_scores.end());
  labels.resize(scores.size(), 0);
  const ThresholdRule rule = choose_threshold(scores, labels);

  auto predict = [&](const std::vector<double>& s) {
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back({.node = static_cast<NodeId>(i), .label = s[i] >= rule.threshold ? 1 : 0, .score = s[i]});
    }
    return out;
  };
  return {.members = predict(mean_sims(target_model, eval.member_graph, "members")),
          .nonmembers = predict(mean_sims(target_model, eval.nonmember_graph, "nonmembers"))};
}

int nearest_centroid_label(std::span<const double> embedding, std::span<const double> member_centroid,
                           std::span<const double> nonmember_centroid) {
  const double d_member = 1.0 - cosine_sim(embedding, member_centroid);
  const double d_nonmember = 1.0 - cosine_sim(embedding, nonmember_centroid);
  return d_member < d_nonmember ? 1 : 0;
}

GeReferences sample_references(const EvaluationSplit& eval, std::size_t count, std::uint64_t seed) {
  if (count > eval.member_graph.num_nodes() || count > eval.nonmember_graph.num_nodes()) {
    throw DegenerateInputError("GE-MIA needs " + std::to_string(count) + " references per side");
  }
  const Rng root(seed);
  Rng rm = root.split("members");
  Rng rn = root.split("nonmembers");
  return {.members = sample_without_replacement(eval.member_graph.num_nodes(), count, rm),
          .nonmembers = sample_without_replacement(eval.nonmember_graph.num_nodes(), count, rn)};
}

SplitPredictions ge_mia(const VictimModel& target_model, const EvaluationSplit& eval,
                        const BaselineSpec& spec, std::uint64_t seed, GeReferences* references_used) {
  spec.validate();
  const GeReferences refs = sample_references(eval, spec.reference_count, seed);
  if (references_used != nullptr) *references_used = refs;
  const DenseMatrix member_emb = embed(target_model, eval.member_graph);
  const DenseMatrix nonmember_emb = embed(target_model, eval.nonmember_graph);
  const std::vector<double> cm = centroid(member_emb, refs.members);
  const std::vector<double> cn = centroid(nonmember_emb, refs.nonmembers);
  auto predict = [&](const DenseMatrix& emb) {
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < emb.rows(); ++i) {
      const auto h = emb.row(i);
      const double margin = cosine_sim(h, cm) - cosine_sim(h, cn);
      out.push_back({.node = static_cast<NodeId>(i), .label = nearest_centroid_label(h, cm, cn),
                     .score = 0.5 + margin / 4.0});
    }
    return out;
  };
  return {.members = predict(member_emb), .nonmembers = predict(nonmember_emb)};
}

ParameterChange node_parameter_change(const VictimModel& model, NodeObjective& objective, NodeId node,
                                      std::size_t epochs, double learning_rate) {
  VictimModel tuned = model;
  AdamState adam(tuned.params(), {.learning_rate = learning_rate});
  ParamSet grads = tuned.params().zeros_like();
  ParameterChange change;
  for (std::size_t e = 0; e < epochs; ++e) {
    grads.set_zero();
    const double loss = objective.loss(tuned, node, &grads);
    if (!std::isfinite(loss) || !grads.all_finite()) {
      throw NumericError("GPIA fine-tuning diverged at node " + std::to_string(node));
    }
    adam_step(adam, tuned.params(), grads);
    ++change.epochs_run;
  }
  for (std::size_t i = 0; i < model.params().count(); ++i) {
    double s = 0.0;
    const auto a = model.params()[i].values();
    const auto b = tuned.params()[i].values();
    for (std::size_t j = 0; j < a.size(); ++j) s += (b[j] - a[j]) * (b[j] - a[j]);
    change.norms.push_back(std::sqrt(s));
  }
  return change;
}

SplitPredictions gpia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                      const VictimModel& target_model, const EvaluationSplit& eval,
                      const BaselineSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Rng root(seed);
  std::size_t skipped = 0;
  // Rows of skipped nodes are dropped from training data and predicted as
  // non-members at inference.
  auto features = [&](const VictimModel& model, const Graph& g, std::string_view key,
                      std::vector<bool>* ok) {
    NodeObjective objective(g, model.objective(), model.dims().layers, root.split(key).seed());
    DenseMatrix out(g.num_nodes(), model.params().count());
    ok->assign(g.num_nodes(), true);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      try {
        const ParameterChange c = node_parameter_change(model, objective, v, spec.ft_epochs, spec.ft_learning_rate);
        std::copy(c.norms.begin(), c.norms.end(), out.row(v).begin());
      } catch (const NumericError&) {
        (*ok)[v] = false;
        ++skipped;
      }
    }
    return out;
  };
  auto keep_rows = [](const DenseMatrix& m, const std::vector<bool>& ok) {
    std::vector<double> values;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (!ok[i]) continue;
      values.insert(values.end(), m.row(i).begin(), m.row(i).end());
      ++rows;
    }
    return DenseMatrix(rows, m.cols(), std::move(values));
  };
  std::vector<bool> ok_train, ok_test, ok_members, ok_nonmembers;
  const DenseMatrix f_train = features(shadow_model, shadow.train, "shadow_train", &ok_train);
  const DenseMatrix f_test = features(shadow_model, shadow.test, "shadow_test", &ok_test);
  const DenseMatrix f_members = features(target_model, eval.member_graph, "members", &ok_members);
  const DenseMatrix f_nonmembers = features(target_model, eval.nonmember_graph, "nonmembers", &ok_nonmembers);
  SplitPredictions out = mlp_attack(keep_rows(f_train, ok_train), keep_rows(f_test, ok_test), f_members,
                                    f_nonmembers, spec.classifier, root.split("mlp").seed());
  for (std::size_t i = 0; i < ok_members.size(); ++i) {
    if (!ok_members[i]) out.members[i] = {.node = static_cast<NodeId>(i), .label = 0, .score = 0.5, .skipped = true};
  }
  for (std::size_t i = 0; i < ok_nonmembers.size(); ++i) {
    if (!ok_nonmembers[i]) {
      out.nonmembers[i] = {.node = static_cast<NodeId>(i), .label = 0, .score = 0.5, .skipped = true};
    }
  }
  out.skipped = skipped;
  return out;
}

}  // namespace mgpmia
