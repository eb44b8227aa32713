#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgpmia/gcn.hpp"
#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"
#include "mgpmia/params.hpp"

namespace mgpmia {

enum class ObjectiveKind { kContrastive, kLinkPrediction };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view text);

struct SslObjective {
  ObjectiveKind kind = ObjectiveKind::kLinkPrediction;
  double temperature = 0.5;
  // Negatives per InfoNCE anchor. Link prediction always draws one non-edge
  // per positive edge.
  std::size_t negatives = 5;
  double edge_drop_rate = 0.2;
  double feature_mask_rate = 0.2;

  void validate() const;
};

struct EncoderDims {
  std::size_t shared_dim = 64;  // projector output
  std::size_t hidden_dim = 64;
  std::size_t emb_dim = 64;
  std::size_t layers = 2;
};

struct DomainSpec {
  int domain_id = 0;
  std::size_t feature_dim = 0;
};

// Per-domain linear projectors into a shared space followed by a shared GCN.
//
// Parameters live in one ParamSet: "proj.<domain>" for each domain in
// construction order, then "gcn.<layer>".
class VictimModel {
 public:
  // Projector weights are drawn from a stream keyed by domain id and the
  // encoder from its own stream, so the initialization of a domain does not
  // depend on which other domains are present or their order.
  static VictimModel initialize(std::span<const DomainSpec> domains, const EncoderDims& dims,
                                const SslObjective& objective, std::uint64_t seed);

  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  std::span<const DomainSpec> domains() const { return domains_; }
  std::size_t num_projectors() const { return domains_.size(); }
  std::span<const DenseMatrix> encoder_weights() const {
    return params_.matrices().subspan(domains_.size());
  }
  const EncoderDims& dims() const { return dims_; }
  const SslObjective& objective() const { return objective_; }

  // Index in params() of the projector for domain_id. Unknown domains use the
  // fallback projector when one is set, otherwise MissingProjectorError.
  std::size_t projector_index(int domain_id) const;
  void set_fallback_domain(std::optional<int> domain_id);
  std::optional<int> fallback_domain() const { return fallback_domain_; }

  std::size_t trained_epochs = 0;
  std::uint64_t init_seed = 0;

 private:
  ParamSet params_;
  std::vector<DomainSpec> domains_;
  EncoderDims dims_;
  SslObjective objective_;
  std::optional<int> fallback_domain_;
};

struct ForwardPass {
  std::size_t projector = 0;
  DenseMatrix projected;
  GcnCache cache;
  DenseMatrix embeddings;
};

ForwardPass forward(const VictimModel& model, const Propagator& propagator,
                    const DenseMatrix& features, int domain_id);

// Accumulates parameter gradients into grads (layout of model.params()).
// Returns dL/dfeatures when want_input_grad, otherwise an empty matrix.
DenseMatrix backward(const VictimModel& model, const Propagator& propagator,
                     const DenseMatrix& features, const ForwardPass& pass,
                     DenseMatrix grad_embeddings, ParamSet& grads, bool want_input_grad = false);

DenseMatrix embed(const VictimModel& model, const Graph& graph, int domain_id);
inline DenseMatrix embed(const VictimModel& model, const Graph& graph) {
  return embed(model, graph, graph.domain_id());
}

// Edge dropout plus feature-column masking.
struct Augmentation {
  Graph graph;
  std::vector<double> feature_mask;  // 1 kept, 0 masked, per feature column
};

Augmentation augment_graph(const Graph& graph, const SslObjective& objective, std::uint64_t seed);

// Seed of the p-th augmented view used for contrastive positives.
std::uint64_t view_seed(std::uint64_t seed, std::size_t p);

// A positive sample: `node` embedded in view `view` (0 is the unaugmented
// graph, v > 0 is the augmentation with view_seeds[v - 1]).
struct PositiveRef {
  std::uint32_t view = 0;
  NodeId node = 0;
  friend bool operator==(const PositiveRef&, const PositiveRef&) = default;
};

struct NodeSamples {
  NodeId node = 0;
  std::vector<PositiveRef> positives;
  std::vector<NodeId> negatives;  // always in view 0
  std::vector<std::uint64_t> view_seeds;
  friend bool operator==(const NodeSamples&, const NodeSamples&) = default;
};

// Contrastive: positives are the node itself under P independent
// augmentations, negatives are N distinct uniform other nodes. Link
// prediction: positives are uniform neighbors (with replacement when
// degree < P), negatives uniform non-neighbors (distinct when enough exist).
// Draws depend only on (seed, node).
NodeSamples make_positive_negative(const Graph& graph, NodeId node, const SslObjective& objective,
                                   std::size_t num_positive, std::size_t num_negative,
                                   std::uint64_t seed);

struct SampleSet {
  std::size_t num_positive = 0;
  std::size_t num_negative = 0;
  std::vector<std::uint64_t> view_seeds;
  std::vector<NodeSamples> nodes;
  std::vector<NodeId> skipped;  // nodes without an admissible positive
};

SampleSet sample_nodes(const Graph& graph, std::span<const NodeId> nodes,
                       const SslObjective& objective, std::size_t num_positive,
                       std::size_t num_negative, std::uint64_t seed);

// One stochastic evaluation of the objective over the whole graph. Adds the
// gradient into grads when non-null.
double task_loss(const VictimModel& model, const Graph& graph, std::uint64_t seed, ParamSet* grads);

// Per-node loss terms with exact gradients computed on the node's receptive
// field only. The contrastive augmentation and each node's negatives are
// fixed at construction, so repeated calls see the same term.
class NodeObjective {
 public:
  NodeObjective(const Graph& graph, const SslObjective& objective, std::size_t layers,
                std::uint64_t seed);
  NodeObjective(const NodeObjective&) = delete;
  NodeObjective& operator=(const NodeObjective&) = delete;

  // Contrastive: the node's InfoNCE anchor term. Link prediction: BCE over
  // its incident edges plus as many sampled non-edges (zero for isolated
  // nodes). feature_grad, when given, receives dL/d(features row of node).
  double loss(const VictimModel& model, NodeId node, ParamSet* grads,
              std::vector<double>* feature_grad = nullptr);

  const Graph& graph() const { return *graph_; }

 private:
  const Graph* graph_;
  SslObjective objective_;
  std::size_t layers_;
  std::uint64_t seed_;
  std::unique_ptr<Augmentation> augmentation_;
  LocalViewBuilder builder_;
  std::unique_ptr<LocalViewBuilder> aug_builder_;
};

// Added to the objective during fine-tuning; returns its value and adds its
// gradient into the second argument.
using PenaltyFn = std::function<double(const ParamSet& params, ParamSet& grads)>;

struct TrainConfig {
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

// Joint training of projectors and shared encoder on the member-induced
// subgraph of each domain. Each epoch visits domains round-robin, computing
// every domain's gradient at the current parameters; the gradients are summed
// in ascending domain-id order and applied in one Adam step. loss_curve
// receives the summed loss per epoch.
VictimModel pretrain_multidomain(std::span<const Graph> graphs, std::span<const NodeSet> members,
                                 const SslObjective& objective, const EncoderDims& dims,
                                 const TrainConfig& config,
                                 std::vector<double>* loss_curve = nullptr);

// Trains model in place on graph with its own objective (plus penalty).
// Returns the objective value at the start of every epoch.
std::vector<double> fine_tune(VictimModel& model, const Graph& graph, const TrainConfig& config,
                              const PenaltyFn& penalty = {});

// Checkpoint plus "<path>.meta" key-value sidecar.
void save_victim(const VictimModel& model, const std::filesystem::path& path);
VictimModel load_victim(const std::filesystem::path& path);

}  // namespace mgpmia
