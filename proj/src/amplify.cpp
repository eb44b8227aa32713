#include "mgpmia/amplify.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "mgpmia/adam.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/kv.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

std::vector<double> SimilarityVector::concat() const {
  std::vector<double> out(positive);
  out.insert(out.end(), negative.begin(), negative.end());
  return out;
}

void UnlearnConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (num_positive < 1 || num_negative < 1) throw ConfigError("unlearning needs >= 1 positive and negative");
  if (augment_lr < 0.0 || distill_lr < 0.0) throw ConfigError("learning rates must be >= 0");
}

ProfileViews::ProfileViews(const Graph& graph, const SslObjective& objective,
                           std::span<const std::uint64_t> view_seeds) {
  graphs_.push_back(graph);
  for (std::uint64_t s : view_seeds) graphs_.push_back(augment_graph(graph, objective, s).graph);
  for (const Graph& g : graphs_) propagators_.push_back(Propagator::from_graph(g));
}

std::vector<SimilarityVector> similarity_profile(const VictimModel& model, const ProfileViews& views,
                                                 const SampleSet& samples) {
  std::vector<DenseMatrix> emb;
  emb.reserve(views.count());
  for (std::size_t v = 0; v < views.count(); ++v) {
    const Graph& g = views.graph(v);
    emb.push_back(forward(model, views.propagator(v), g.features(), g.domain_id()).embeddings);
  }
  std::vector<SimilarityVector> out;
  out.reserve(samples.nodes.size());
  for (const NodeSamples& s : samples.nodes) {
    SimilarityVector sv;
    sv.node = s.node;
    const auto anchor = emb[0].row(s.node);
    for (const PositiveRef& p : s.positives) sv.positive.push_back(cosine_sim(anchor, emb[p.view].row(p.node)));
    for (NodeId n : s.negatives) sv.negative.push_back(cosine_sim(anchor, emb[0].row(n)));
    out.push_back(std::move(sv));
  }
  return out;
}

std::vector<SimilarityVector> similarity_profile(const VictimModel& model, const Graph& graph,
                                                 const SampleSet& samples) {
  return similarity_profile(model, ProfileViews(graph, model.objective(), samples.view_seeds), samples);
}

SimilarityVector teacher_scores(const SimilarityVector& target, const SimilarityVector& augment,
                                double lambda) {
  if (target.node != augment.node || target.positive.size() != augment.positive.size() ||
      target.negative.size() != augment.negative.size()) {
    throw ShapeError("teacher_scores: similarity vectors are not aligned");
  }
  SimilarityVector t;
  t.node = target.node;
  t.positive.resize(target.positive.size());
  t.negative.resize(target.negative.size());
  for (std::size_t i = 0; i < t.positive.size(); ++i) {
    t.positive[i] = (1.0 - lambda) * target.positive[i] + lambda * augment.positive[i];
  }
  for (std::size_t i = 0; i < t.negative.size(); ++i) {
    t.negative[i] = (1.0 - lambda) * target.negative[i] + lambda * augment.negative[i];
  }
  return t;
}

VictimModel fine_tune_augment(const VictimModel& target, const Graph& unlearn_graph,
                              const UnlearnConfig& config, std::uint64_t seed) {
  if (unlearn_graph.num_nodes() == 0) throw DegenerateInputError("unlearn graph is empty");
  VictimModel augment = target;
  fine_tune(augment, unlearn_graph,
            {.epochs = config.augment_epochs, .learning_rate = config.augment_lr, .seed = seed});
  return augment;
}

double distillation_loss(const VictimModel& student, const ProfileViews& views,
                         const SampleSet& samples, std::span<const SimilarityVector> teacher,
                         ParamSet* grads) {
  if (teacher.size() != samples.nodes.size()) throw ShapeError("distillation: teacher/sample count mismatch");
  if (samples.nodes.empty()) return 0.0;
  std::vector<ForwardPass> passes;
  std::vector<DenseMatrix> emb;
  for (std::size_t v = 0; v < views.count(); ++v) {
    const Graph& g = views.graph(v);
    passes.push_back(forward(student, views.propagator(v), g.features(), g.domain_id()));
    emb.push_back(passes.back().embeddings);
  }
  std::vector<ScoreTerm> terms;
  for (std::size_t i = 0; i < samples.nodes.size(); ++i) {
    const NodeSamples& s = samples.nodes[i];
    const SimilarityVector& t = teacher[i];
    if (t.node != s.node || t.positive.size() != s.positives.size() || t.negative.size() != s.negatives.size()) {
      throw ShapeError("distillation: teacher scores not aligned with samples");
    }
    for (std::size_t p = 0; p < s.positives.size(); ++p) {
      terms.push_back({0, s.node, s.positives[p].view, s.positives[p].node, t.positive[p]});
    }
    for (std::size_t n = 0; n < s.negatives.size(); ++n) {
      terms.push_back({0, s.node, 0, s.negatives[n], t.negative[n]});
    }
  }
  const double normalizer = static_cast<double>(samples.nodes.size());
  if (grads == nullptr) return mse_on_scores(emb, terms, normalizer, {});
  std::vector<DenseMatrix> g;
  for (const DenseMatrix& e : emb) g.emplace_back(e.rows(), e.cols());
  const double loss = mse_on_scores(emb, terms, normalizer, g);
  for (std::size_t v = 0; v < views.count(); ++v) {
    backward(student, views.propagator(v), views.graph(v).features(), passes[v], std::move(g[v]), *grads);
  }
  return loss;
}

void write_amplification_report(std::ostream& out, const AmplificationReport& report) {
  KeyValues kv;
  kv["lambda"] = format_double(report.lambda);
  kv["augment_epochs"] = std::to_string(report.augment_epochs);
  kv["distill_epochs"] = std::to_string(report.distill_epochs);
  kv["initial_distill_loss"] = format_double(report.initial_loss);
  kv["final_distill_loss"] = format_double(report.final_loss);
  kv["gap_before"] = format_double(report.gap_before);
  kv["gap_after"] = format_double(report.gap_after);
  write_key_values(out, kv);
}

UnlearnResult unlearn(const VictimModel& target, const Graph& unlearn_graph,
                      const UnlearnConfig& config, std::uint64_t seed) {
  config.validate();
  if (unlearn_graph.num_nodes() == 0) throw DegenerateInputError("unlearn node set is empty");
  const Rng root(seed);
  UnlearnResult r{.model = target, .augment = fine_tune_augment(target, unlearn_graph, config,
                                                                root.split("augment").seed())};
  std::vector<NodeId> nodes(unlearn_graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  r.samples = sample_nodes(unlearn_graph, nodes, target.objective(), config.num_positive,
                           config.num_negative, root.split("samples").seed());
  const ProfileViews views(unlearn_graph, target.objective(), r.samples.view_seeds);
  r.target_scores = similarity_profile(target, views, r.samples);
  r.augment_scores = similarity_profile(r.augment, views, r.samples);
  std::vector<SimilarityVector> teacher;
  teacher.reserve(r.target_scores.size());
  for (std::size_t i = 0; i < r.target_scores.size(); ++i) {
    teacher.push_back(teacher_scores(r.target_scores[i], r.augment_scores[i], config.lambda));
  }

  r.report.lambda = config.lambda;
  r.report.augment_epochs = config.augment_epochs;
  r.report.distill_epochs = config.distill_epochs;
  AdamState adam(r.model.params(), {.learning_rate = config.distill_lr});
  ParamSet grads = r.model.params().zeros_like();
  for (std::size_t epoch = 0; epoch < config.distill_epochs; ++epoch) {
    grads.set_zero();
    const double loss = distillation_loss(r.model, views, r.samples, teacher, &grads);
    if (!std::isfinite(loss) || !grads.all_finite()) {
      throw NumericError("distillation diverged at epoch " + std::to_string(epoch));
    }
    r.report.loss_curve.push_back(loss);
    adam_step(adam, r.model.params(), grads);
  }
  r.report.initial_loss = r.report.loss_curve.empty()
                              ? distillation_loss(r.model, views, r.samples, teacher, nullptr)
                              : r.report.loss_curve.front();
  r.report.final_loss = distillation_loss(r.model, views, r.samples, teacher, nullptr);
  r.model.trained_epochs += config.distill_epochs;
  return r;
}

double similarity_gap(const VictimModel& model, const Graph& member_graph,
                      const Graph& nonmember_graph, std::size_t num_positive,
                      std::size_t num_negative, std::uint64_t seed) {
  auto mean_contrast = [&](const Graph& g, std::uint64_t s) {
    std::vector<NodeId> nodes(g.num_nodes());
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    const SampleSet samples = sample_nodes(g, nodes, model.objective(), num_positive, num_negative, s);
    const auto profile = similarity_profile(model, g, samples);
    if (profile.empty()) throw DegenerateInputError("similarity_gap: no profiled nodes");
    double total = 0.0;
    for (const SimilarityVector& sv : profile) {
      const double pos = std::accumulate(sv.positive.begin(), sv.positive.end(), 0.0) /
                         static_cast<double>(sv.positive.size());
      const double neg = std::accumulate(sv.negative.begin(), sv.negative.end(), 0.0) /
                         static_cast<double>(sv.negative.size());
      total += pos - neg;
    }
    return total / static_cast<double>(profile.size());
  };
  const Rng root(seed);
  return mean_contrast(member_graph, root.split("members").seed()) -
         mean_contrast(nonmember_graph, root.split("nonmembers").seed());
}

}  // namespace mgpmia
