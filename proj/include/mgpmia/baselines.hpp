#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mgpmia/attack.hpp"
#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

enum class BaselineKind { kEmbedMia, kGradMia, kNloMia, kGloMia, kGeMia, kGpia };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view text);
std::span<const BaselineKind> all_baselines();

struct BaselineSpec {
  std::size_t k_perturb = 10;         // NLO / GLO perturbed copies
  double edge_fraction = 0.0015;      // fraction of edges modified per copy
  std::size_t reference_count = 20;   // GE-MIA references per class
  std::size_t ft_epochs = 10;         // GPIA per-node fine-tuning
  double ft_learning_rate = 1e-2;
  ClassifierConfig classifier{};

  void validate() const;
};

// --- Embed-MIA: MLP on raw output embeddings.
DenseMatrix embedding_features(const VictimModel& model, const Graph& graph);

SplitPredictions embed_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                           const VictimModel& target_model, const EvaluationSplit& eval,
                           const BaselineSpec& spec, std::uint64_t seed);

// --- Grad-MIA: MLP on d(node loss)/d(node input features).
DenseMatrix gradient_features(const VictimModel& model, const Graph& graph, std::uint64_t seed);

SplitPredictions grad_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                          const VictimModel& target_model, const EvaluationSplit& eval,
                          const BaselineSpec& spec, std::uint64_t seed);

// --- NLO-MIA: MLP on pairwise cosine similarities of a node's embeddings
// across k perturbed copies of the graph (C(k, 2) features, pairs (i, j)
// with i < j in lexicographic order).
std::vector<Graph> perturbation_set(const Graph& graph, std::size_t k, double edge_fraction,
                                    std::uint64_t seed);
DenseMatrix perturbation_features(const VictimModel& model, std::span<const Graph> perturbed);

SplitPredictions nlo_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                         const VictimModel& target_model, const EvaluationSplit& eval,
                         const BaselineSpec& spec, std::uint64_t seed);

// --- GLO-MIA: threshold on the mean pairwise similarity.
struct ThresholdRule {
  double threshold = 0.0;
  double accuracy = 0.0;
};

// Best threshold among the observed scores (member iff score >= threshold).
// Ties keep the smallest threshold.
ThresholdRule choose_threshold(std::span<const double> scores, std::span<const int> labels);

SplitPredictions glo_mia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                         const VictimModel& target_model, const EvaluationSplit& eval,
                         const BaselineSpec& spec, std::uint64_t seed);

// --- GE-MIA: nearest reference centroid under cosine distance.
// Member iff strictly closer to the member centroid.
int nearest_centroid_label(std::span<const double> embedding, std::span<const double> member_centroid,
                           std::span<const double> nonmember_centroid);

struct GeReferences {
  std::vector<NodeId> members;     // ids in the member graph
  std::vector<NodeId> nonmembers;  // ids in the non-member graph
};

GeReferences sample_references(const EvaluationSplit& eval, std::size_t count, std::uint64_t seed);

SplitPredictions ge_mia(const VictimModel& target_model, const EvaluationSplit& eval,
                        const BaselineSpec& spec, std::uint64_t seed,
                        GeReferences* references_used = nullptr);

// --- GPIA: per-node fine-tuning, feature = per-parameter-matrix L2 norm of
// the parameter change.
struct ParameterChange {
  std::vector<double> norms;  // one per named parameter matrix
  std::size_t epochs_run = 0;
};

ParameterChange node_parameter_change(const VictimModel& model, NodeObjective& objective, NodeId node,
                                      std::size_t epochs, double learning_rate);

SplitPredictions gpia(const VictimModel& shadow_model, const ShadowSplit& shadow,
                      const VictimModel& target_model, const EvaluationSplit& eval,
                      const BaselineSpec& spec, std::uint64_t seed);

}  // namespace mgpmia
