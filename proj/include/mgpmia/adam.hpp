#pragma once

#include <cstddef>

#include "mgpmia/params.hpp"

namespace mgpmia {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators aligned with a ParamSet.
struct AdamState {
  AdamState(const ParamSet& like, AdamConfig config);

  AdamConfig config;
  std::size_t step = 0;
  ParamSet first_moment;
  ParamSet second_moment;
};

// Bias-corrected Adam update of params in place.
void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads);

}  // namespace mgpmia
