#include "mgpmia/gcn.hpp"

#include <cmath>
#include <string>

#include "mgpmia/errors.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

constexpr NodeId kAbsent = ~NodeId{0};

double norm_weight(std::size_t deg_u, std::size_t deg_v) {
  return 1.0 / std::sqrt(static_cast<double>(deg_u + 1) * static_cast<double>(deg_v + 1));
}

}  // namespace

Propagator Propagator::from_graph(const Graph& graph) {
  Propagator p;
  const std::size_t n = graph.num_nodes();
  p.offsets_.reserve(n + 1);
  p.cols_.reserve(n + 2 * graph.num_edges());
  p.weights_.reserve(n + 2 * graph.num_edges());
  p.offsets_.push_back(0);
  for (NodeId u = 0; u < n; ++u) {
    const std::size_t du = graph.degree(u);
    bool self_done = false;
    for (NodeId v : graph.neighbors(u)) {
      if (!self_done && v > u) {
        p.cols_.push_back(u);
        p.weights_.push_back(norm_weight(du, du));
        self_done = true;
      }
      p.cols_.push_back(v);
      p.weights_.push_back(norm_weight(du, graph.degree(v)));
    }
    if (!self_done) {
      p.cols_.push_back(u);
      p.weights_.push_back(norm_weight(du, du));
    }
    p.offsets_.push_back(p.cols_.size());
  }
  return p;
}

DenseMatrix Propagator::apply(const DenseMatrix& x) const {
  if (x.rows() != num_nodes()) {
    throw ShapeError("propagator over " + std::to_string(num_nodes()) + " nodes applied to " +
                     std::to_string(x.rows()) + " rows");
  }
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    auto out_row = out.row(u);
    for (std::size_t k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      const double w = weights_[k];
      const auto in_row = x.row(cols_[k]);
      for (std::size_t j = 0; j < out_row.size(); ++j) out_row[j] += w * in_row[j];
    }
  }
  return out;
}

DenseMatrix Propagator::to_dense() const {
  DenseMatrix dense(num_nodes(), num_nodes());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    for (std::size_t k = offsets_[u]; k < offsets_[u + 1]; ++k) dense(u, cols_[k]) = weights_[k];
  }
  return dense;
}

LocalViewBuilder::LocalViewBuilder(const Graph& graph)
    : graph_(&graph), local_id_(graph.num_nodes(), kAbsent) {}

LocalView LocalViewBuilder::build(std::span<const NodeId> seeds, std::size_t hops) {
  const Graph& g = *graph_;
  LocalView view;
  auto visit = [&](NodeId v) {
    if (local_id_[v] == kAbsent) {
      local_id_[v] = static_cast<NodeId>(view.nodes.size());
      view.nodes.push_back(v);
    }
    return local_id_[v];
  };
  view.seed_rows.reserve(seeds.size());
  for (NodeId s : seeds) {
    if (s >= g.num_nodes()) throw RangeError("local view seed " + std::to_string(s) + " out of range");
    view.seed_rows.push_back(visit(s));
  }
  std::size_t frontier_begin = 0;
  for (std::size_t h = 0; h < hops; ++h) {
    const std::size_t frontier_end = view.nodes.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      for (NodeId v : g.neighbors(view.nodes[i])) visit(v);
    }
    frontier_begin = frontier_end;
  }

  Propagator& p = view.propagator;
  p.offsets_.push_back(0);
  for (NodeId global : view.nodes) {
    const std::size_t du = g.degree(global);
    p.cols_.push_back(local_id_[global]);
    p.weights_.push_back(norm_weight(du, du));
    for (NodeId v : g.neighbors(global)) {
      if (local_id_[v] == kAbsent) continue;
      p.cols_.push_back(local_id_[v]);
      p.weights_.push_back(norm_weight(du, g.degree(v)));
    }
    p.offsets_.push_back(p.cols_.size());
  }
  view.features = DenseMatrix(view.nodes.size(), g.feature_dim());
  for (std::size_t i = 0; i < view.nodes.size(); ++i) {
    const auto src = g.features().row(view.nodes[i]);
    std::copy(src.begin(), src.end(), view.features.row(i).begin());
  }
  for (NodeId global : view.nodes) local_id_[global] = kAbsent;
  return view;
}

DenseMatrix gcn_forward(std::span<const DenseMatrix> weights, const Propagator& propagator,
                        const DenseMatrix& x, GcnCache* cache) {
  if (weights.empty()) throw ShapeError("GCN needs at least one layer");
  if (x.rows() != propagator.num_nodes()) {
    throw ShapeError("GCN input has " + std::to_string(x.rows()) + " rows for " +
                     std::to_string(propagator.num_nodes()) + " nodes");
  }
  if (cache != nullptr) {
    cache->aggregated.clear();
    cache->pre_activation.clear();
  }
  DenseMatrix h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (h.cols() != weights[l].rows()) {
      throw ShapeError("GCN layer " + std::to_string(l) + " expects input dim " +
                       std::to_string(weights[l].rows()) + ", got " + std::to_string(h.cols()));
    }
    DenseMatrix agg = propagator.apply(h);
    DenseMatrix z = matmul(agg, weights[l]);
    h = z;
    if (l + 1 < weights.size()) {
      for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
    }
    if (cache != nullptr) {
      cache->aggregated.push_back(std::move(agg));
      cache->pre_activation.push_back(std::move(z));
    }
  }
  if (!h.all_finite()) throw NumericError("GCN produced non-finite embeddings");
  return h;
}

DenseMatrix gcn_backward(std::span<const DenseMatrix> weights, const Propagator& propagator,
                         const GcnCache& cache, DenseMatrix grad_out,
                         std::span<DenseMatrix> weight_grads, bool want_input_grad) {
  if (weight_grads.size() != weights.size() || cache.aggregated.size() != weights.size()) {
    throw ShapeError("gcn_backward: layer count mismatch");
  }
  DenseMatrix grad = std::move(grad_out);
  for (std::size_t l = weights.size(); l-- > 0;) {
    if (l + 1 < weights.size()) {
      const auto z = cache.pre_activation[l].values();
      auto g = grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (z[i] <= 0.0) g[i] = 0.0;
      }
    }
    add_matmul_tn(cache.aggregated[l], grad, weight_grads[l]);
    if (l == 0 && !want_input_grad) return {};
    // The propagator is symmetric, so its transpose is itself.
    grad = propagator.apply(matmul_nt(grad, weights[l]));
  }
  return grad;
}

GcnEncoder GcnEncoder::init(std::span<const std::size_t> dims, Rng& rng) {
  if (dims.size() < 2) throw ShapeError("GCN needs at least one layer");
  GcnEncoder enc;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    enc.layers.push_back(DenseMatrix::glorot(dims[l], dims[l + 1], rng));
  }
  return enc;
}

DenseMatrix GcnEncoder::forward(const Graph& graph, const DenseMatrix& x) const {
  return gcn_forward(layers, Propagator::from_graph(graph), x);
}

}  // namespace mgpmia
