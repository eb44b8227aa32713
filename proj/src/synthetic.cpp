#include "mgpmia/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgpmia/errors.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

SyntheticGraph generate_sbm(const SbmSpec& spec) {
  const std::size_t n = spec.num_nodes;
  if (n < 2 || spec.blocks < 1 || spec.blocks > n) {
    throw DegenerateInputError("SBM needs n >= 2 and 1 <= blocks <= n (n=" + std::to_string(n) + ")");
  }
  if (spec.homophily < 0.0 || spec.homophily > 1.0 || spec.avg_degree < 0.0) {
    throw RangeError("SBM homophily must lie in [0, 1] and avg_degree must be >= 0");
  }
  Rng family(spec.family_seed);
  Rng rng(spec.instance_seed);

  SyntheticGraph out;
  out.blocks.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.blocks[i] = static_cast<int>(i % spec.blocks);
  rng.split("blocks").shuffle(std::span<int>(out.blocks));

  const double block_size = static_cast<double>(n) / static_cast<double>(spec.blocks);
  const double inside = std::max(block_size - 1.0, 1.0);
  const double outside = std::max(static_cast<double>(n) - block_size, 1.0);
  const double p_in = std::min(1.0, spec.avg_degree * spec.homophily / inside);
  const double p_out =
      spec.blocks == 1 ? 0.0 : std::min(1.0, spec.avg_degree * (1.0 - spec.homophily) / outside);

  Rng edge_rng = rng.split("edges");
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = out.blocks[u] == out.blocks[v] ? p_in : p_out;
      if (edge_rng.uniform() < p) edges.push_back({u, v});
    }
  }

  DenseMatrix means(spec.blocks, spec.feature_dim);
  for (double& m : means.values()) m = spec.mean_scale * family.normal();
  DenseMatrix features(n, spec.feature_dim);
  Rng feature_rng = rng.split("features");
  for (std::size_t i = 0; i < n; ++i) {
    const auto mean = means.row(static_cast<std::size_t>(out.blocks[i]));
    auto row = features.row(i);
    for (std::size_t j = 0; j < spec.feature_dim; ++j) {
      row[j] = mean[j] + spec.noise * feature_rng.normal();
    }
  }
  out.graph = Graph::from_edges(n, edges, std::move(features), spec.domain_id);
  return out;
}

}  // namespace mgpmia
