#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

struct PcaResult {
  DenseMatrix projection;  // n x r, r <= k
  DenseMatrix components;  // r x d, orthonormal rows
  // Length k. Entries past r are zero.
  std::vector<double> explained_variance_ratio;
  bool rank_deficient = false;
};

// Centers columns and projects onto the top-k covariance eigenvectors found
// by power iteration with deflation. Each eigenvector's first nonzero entry
// is made positive.
PcaResult pca_project(const DenseMatrix& embeddings, std::size_t k = 2);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};
// Top eigenpairs of a symmetric positive semidefinite matrix. Stops early
// once the remaining spectrum is numerically zero.
std::vector<EigenPair> top_eigenpairs(const DenseMatrix& symmetric, std::size_t k,
                                      double tolerance = 1e-10);

inline constexpr double kRobustnessBudget = 0.15;

// Per-node mean cosine similarity between embeddings of the original graph
// and of `trials` edge-perturbed copies.
std::vector<double> robustness_probe(const VictimModel& model, const Graph& graph,
                                     std::span<const NodeId> nodes, double budget,
                                     std::size_t trials, std::uint64_t seed);

struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};
DistributionSummary summarize(std::span<const double> values);

// Plot-ready exports: node,label,pc1..pck and node,label,similarity.
void write_pca_csv(std::ostream& out, const PcaResult& pca, std::span<const NodeId> nodes,
                   std::span<const int> labels);
void write_robustness_csv(std::ostream& out, std::span<const NodeId> nodes, std::span<const int> labels,
                          std::span<const double> similarity);

}  // namespace mgpmia
