#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"

namespace mgpmia {

class Rng;

// Row-wise sparse form of D^-1/2 (A + I) D^-1/2, where D counts the self loop.
class Propagator {
 public:
  static Propagator from_graph(const Graph& graph);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  // Returns propagator * x.
  DenseMatrix apply(const DenseMatrix& x) const;

  // Dense copy; test and diagnostic use only.
  DenseMatrix to_dense() const;

 private:
  friend class LocalViewBuilder;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> cols_;
  std::vector<double> weights_;
};

// Ball of radius `hops` around a set of seed nodes, carrying the full graph's
// normalization weights. An encoder with at most `hops` layers produces the
// same output rows at the seeds as on the full graph, and gradients of any
// loss that reads only seed rows are identical too.
struct LocalView {
  Propagator propagator;
  std::vector<NodeId> nodes;      // local id -> global id
  std::vector<NodeId> seed_rows;  // local row of each requested seed, in request order
  DenseMatrix features;
};

class LocalViewBuilder {
 public:
  explicit LocalViewBuilder(const Graph& graph);

  // Cost is proportional to the size of the ball, not the graph.
  LocalView build(std::span<const NodeId> seeds, std::size_t hops);

 private:
  const Graph* graph_;
  std::vector<NodeId> local_id_;
};

// Activations saved by gcn_forward for the backward pass.
struct GcnCache {
  std::vector<DenseMatrix> aggregated;      // propagator * H_{l-1}
  std::vector<DenseMatrix> pre_activation;  // aggregated * W_l
};

// H_l = relu(P H_{l-1} W_l) for every layer but the last, which is linear.
DenseMatrix gcn_forward(std::span<const DenseMatrix> weights, const Propagator& propagator,
                        const DenseMatrix& x, GcnCache* cache = nullptr);

// Accumulates dL/dW_l into weight_grads. Returns dL/dx when want_input_grad,
// otherwise an empty matrix.
DenseMatrix gcn_backward(std::span<const DenseMatrix> weights, const Propagator& propagator,
                         const GcnCache& cache, DenseMatrix grad_out,
                         std::span<DenseMatrix> weight_grads, bool want_input_grad);

// Standalone encoder for direct use and tests; victims keep their layer
// weights inside a ParamSet and call gcn_forward directly.
struct GcnEncoder {
  std::vector<DenseMatrix> layers;

  static GcnEncoder init(std::span<const std::size_t> dims, Rng& rng);

  std::size_t num_layers() const { return layers.size(); }
  std::size_t input_dim() const { return layers.front().rows(); }
  std::size_t output_dim() const { return layers.back().cols(); }

  DenseMatrix forward(const Graph& graph, const DenseMatrix& x) const;
};

}  // namespace mgpmia
