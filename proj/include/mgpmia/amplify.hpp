#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mgpmia/gcn.hpp"
#include "mgpmia/graph.hpp"
#include "mgpmia/params.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

// Cosine similarities of a node to its positive and negative samples.
struct SimilarityVector {
  NodeId node = 0;
  std::vector<double> positive;
  std::vector<double> negative;

  // Positives first (sample order), then negatives.
  std::vector<double> concat() const;
  friend bool operator==(const SimilarityVector&, const SimilarityVector&) = default;
};

struct UnlearnConfig {
  double lambda = 1.0;
  std::size_t augment_epochs = 5;
  std::size_t distill_epochs = 50;
  double augment_lr = 1e-3;
  double distill_lr = 1e-3;
  std::size_t num_positive = 5;
  std::size_t num_negative = 5;

  void validate() const;
};

// The graph under every view a SampleSet references: view 0 is the graph
// itself, view p > 0 its augmentation with view_seeds[p - 1].
class ProfileViews {
 public:
  ProfileViews(const Graph& graph, const SslObjective& objective,
               std::span<const std::uint64_t> view_seeds);

  std::size_t count() const { return graphs_.size(); }
  const Graph& graph(std::size_t view) const { return graphs_[view]; }
  const Propagator& propagator(std::size_t view) const { return propagators_[view]; }

 private:
  std::vector<Graph> graphs_;
  std::vector<Propagator> propagators_;
};

std::vector<SimilarityVector> similarity_profile(const VictimModel& model, const ProfileViews& views,
                                                 const SampleSet& samples);
std::vector<SimilarityVector> similarity_profile(const VictimModel& model, const Graph& graph,
                                                 const SampleSet& samples);

// s_target - lambda * (s_target - s_augment), elementwise and unclamped.
// Evaluated as (1 - lambda) s_target + lambda s_augment so both endpoints are exact.
SimilarityVector teacher_scores(const SimilarityVector& target, const SimilarityVector& augment,
                                double lambda);

// Copy of target fine-tuned on the unlearn graph with its own objective.
VictimModel fine_tune_augment(const VictimModel& target, const Graph& unlearn_graph,
                              const UnlearnConfig& config, std::uint64_t seed);

// Mean over sampled nodes of ||s_student - s_teacher||^2; gradient flows
// through the student's embeddings in every view.
double distillation_loss(const VictimModel& student, const ProfileViews& views,
                         const SampleSet& samples, std::span<const SimilarityVector> teacher,
                         ParamSet* grads);

struct AmplificationReport {
  double lambda = 0.0;
  std::size_t augment_epochs = 0;
  std::size_t distill_epochs = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_curve{};
  // Filled in by callers that hold membership ground truth.
  double gap_before = 0.0;
  double gap_after = 0.0;
};

void write_amplification_report(std::ostream& out, const AmplificationReport& report);

struct UnlearnResult {
  VictimModel model;
  VictimModel augment;
  SampleSet samples{};
  std::vector<SimilarityVector> target_scores{};
  std::vector<SimilarityVector> augment_scores{};
  AmplificationReport report{};
};

// Builds the augment model, forms teacher scores from shared samples and
// distills a copy of target toward them. target is not modified.
UnlearnResult unlearn(const VictimModel& target, const Graph& unlearn_graph,
                      const UnlearnConfig& config, std::uint64_t seed);

// Mean per-node contrast (mean positive similarity minus mean negative
// similarity) over members minus the same over non-members. Positives and
// negatives are drawn with the same seed for every model compared.
double similarity_gap(const VictimModel& model, const Graph& member_graph,
                      const Graph& nonmember_graph, std::size_t num_positive,
                      std::size_t num_negative, std::uint64_t seed);

}  // namespace mgpmia
