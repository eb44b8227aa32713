#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mgpmia/graph.hpp"

namespace mgpmia {

// Stochastic block model with block-dependent Gaussian features.
//
// family_seed fixes the per-block feature means, so two graphs drawn with the
// same family_seed and different instance_seed come from the same
// distribution (used for the attacker's shadow graph).
struct SbmSpec {
  std::size_t num_nodes = 300;
  std::size_t blocks = 2;
  double avg_degree = 8.0;
  double homophily = 0.8;  // expected fraction of a node's edges inside its block
  std::size_t feature_dim = 16;
  double mean_scale = 1.0;
  double noise = 1.0;
  int domain_id = 0;
  std::uint64_t family_seed = 1;
  std::uint64_t instance_seed = 1;
};

struct SyntheticGraph {
  Graph graph;
  std::vector<int> blocks;
};

SyntheticGraph generate_sbm(const SbmSpec& spec);

}  // namespace mgpmia
