#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mgpmia/graph.hpp"
#include "mgpmia/params.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

// Diagonal Fisher information, flattened in ParamSet order.
struct FisherDiag {
  std::vector<double> values;
  std::size_t sample_count = 0;
};

// Empirical Fisher: mean over samples of the elementwise squared gradient.
FisherDiag fisher_from_gradients(std::span<const std::vector<double>> per_sample_grads);

// One sample per node of shadow_train: that node's loss term under the
// model's own objective. Accumulated in node order.
FisherDiag estimate_fisher(const VictimModel& model, const Graph& shadow_train, std::uint64_t seed);

struct ShadowConfig {
  double alpha = 1.0;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
};

// alpha * sum_i F_i (theta_i - anchor_i)^2; adds 2 alpha F_i (theta_i - anchor_i)
// into grads when non-null.
double ewc_penalty(const ParamSet& params, std::span<const double> anchor, const FisherDiag& fisher,
                   double alpha, ParamSet* grads);

struct ShadowResult {
  VictimModel model;
  std::vector<double> objective_curve{};  // task loss + penalty at the start of each epoch
};

// Fine-tunes a copy of `unlearned` on shadow_train under the Fisher-weighted
// anchor to its own parameters.
ShadowResult incremental_finetune(const VictimModel& unlearned, const Graph& shadow_train,
                                  const FisherDiag& fisher, const ShadowConfig& config,
                                  std::uint64_t seed);

// Model parameters followed by a 1 x total_len matrix named "fisher.diag".
void save_shadow_checkpoint(const std::filesystem::path& path, const ParamSet& params,
                            const FisherDiag& fisher);
FisherDiag fisher_from_checkpoint(const ParamSet& checkpoint);

}  // namespace mgpmia
