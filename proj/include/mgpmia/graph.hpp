#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "mgpmia/matrix.hpp"

namespace mgpmia {

using NodeId = std::uint32_t;
// Sorted, duplicate-free list of node ids.
using NodeSet = std::vector<NodeId>;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct IngestStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Immutable undirected graph with node features.
//
// Adjacency is stored as compressed sorted neighbor lists; both directions of
// every undirected edge are present, self loops and duplicate edges never are.
class Graph {
 public:
  Graph() = default;

  // Self loops and duplicates (in either orientation) are dropped and counted.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          DenseMatrix features, int domain_id, IngestStats* stats = nullptr);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }
  std::size_t feature_dim() const { return features_.cols(); }
  int domain_id() const { return domain_id_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  bool has_edge(NodeId u, NodeId v) const;
  double average_degree() const;

  const DenseMatrix& features() const { return features_; }

  // Each undirected edge once as (u, v) with u < v, in ascending order.
  std::vector<Edge> edge_list() const;

  Graph with_features(DenseMatrix features) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  DenseMatrix features_;
  int domain_id_ = 0;
};

// Reads the tab-separated edge file and the "n d" feature file.
Graph load_graph(const std::filesystem::path& edge_path, const std::filesystem::path& feature_path,
                 int domain_id, IngestStats* stats = nullptr);

void write_graph(const Graph& graph, const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path);

struct MembershipSplit {
  NodeSet members;
  NodeSet nonmembers;
};

// Random half/half split: |members| = ceil(n/2).
MembershipSplit split_half(const Graph& graph, std::uint64_t seed);

struct GraphPartition {
  NodeSet unlearn_nodes;
  NodeSet shadow_train_nodes;
  NodeSet shadow_test_nodes;
  std::uint64_t seed = 0;
};

// |unlearn| = round(fraction * n); the rest is split half/half (train gets the
// extra node when the remainder is odd).
GraphPartition partition_shadow(const Graph& graph, double unlearn_fraction, std::uint64_t seed);

// Nodes are relabeled 0..k-1 by ascending original id.
Graph induced_subgraph(const Graph& graph, std::span<const NodeId> nodes);

// Applies exactly round(budget_fraction * num_edges) random actions, each a
// deletion of a uniform existing edge or an insertion of a uniform non-edge
// with probability 1/2. When one action kind is impossible the other is used.
struct PerturbStats {
  std::size_t deletions = 0;
  std::size_t insertions = 0;
};
Graph perturb_edges(const Graph& graph, double budget_fraction, std::uint64_t seed,
                    PerturbStats* stats = nullptr);

// FNV-1a over adjacency, feature bits and domain id.
std::uint64_t graph_fingerprint(const Graph& graph);

}  // namespace mgpmia
