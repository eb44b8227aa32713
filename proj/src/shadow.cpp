#include "mgpmia/shadow.hpp"

#include <cmath>
#include <string>

#include "mgpmia/errors.hpp"

namespace mgpmia {

FisherDiag fisher_from_gradients(std::span<const std::vector<double>> per_sample_grads) {
  FisherDiag f;
  if (per_sample_grads.empty()) return f;
  f.values.assign(per_sample_grads.front().size(), 0.0);
  for (const auto& g : per_sample_grads) {
    if (g.size() != f.values.size()) throw ShapeError("fisher: gradient lengths differ");
    for (std::size_t i = 0; i < g.size(); ++i) f.values[i] += g[i] * g[i];
  }
  f.sample_count = per_sample_grads.size();
  for (double& v : f.values) v /= static_cast<double>(f.sample_count);
  return f;
}

FisherDiag estimate_fisher(const VictimModel& model, const Graph& shadow_train, std::uint64_t seed) {
  if (shadow_train.num_nodes() == 0) throw DegenerateInputError("estimate_fisher: empty shadow graph");
  NodeObjective objective(shadow_train, model.objective(), model.dims().layers, seed);
  ParamSet grads = model.params().zeros_like();
  FisherDiag f;
  f.values.assign(grads.total_len(), 0.0);
  for (NodeId v = 0; v < shadow_train.num_nodes(); ++v) {
    grads.set_zero();
    objective.loss(model, v, &grads);
    std::size_t offset = 0;
    for (const DenseMatrix& g : grads.matrices()) {
      for (double x : g.values()) f.values[offset++] += x * x;
    }
  }
  f.sample_count = shadow_train.num_nodes();
  for (double& v : f.values) {
    v /= static_cast<double>(f.sample_count);
    if (!std::isfinite(v)) throw NumericError("estimate_fisher: non-finite Fisher entry");
  }
  return f;
}

double ewc_penalty(const ParamSet& params, std::span<const double> anchor, const FisherDiag& fisher,
                   double alpha, ParamSet* grads) {
  const std::size_t n = params.total_len();
  if (anchor.size() != n || fisher.values.size() != n) {
    throw ShapeError("ewc_penalty: anchor/Fisher length " + std::to_string(fisher.values.size()) +
                     " does not match " + std::to_string(n) + " parameters");
  }
  double total = 0.0;
  std::size_t offset = 0;
  for (std::size_t m = 0; m < params.count(); ++m) {
    const auto p = params[m].values();
    for (std::size_t j = 0; j < p.size(); ++j, ++offset) {
      const double diff = p[j] - anchor[offset];
      total += fisher.values[offset] * diff * diff;
      if (grads != nullptr) (*grads)[m].values()[j] += 2.0 * alpha * fisher.values[offset] * diff;
    }
  }
  return alpha * total;
}

ShadowResult incremental_finetune(const VictimModel& unlearned, const Graph& shadow_train,
                                  const FisherDiag& fisher, const ShadowConfig& config,
                                  std::uint64_t seed) {
  if (!(config.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (fisher.values.size() != unlearned.params().total_len()) {
    throw ShapeError("Fisher diagonal is not aligned with the model parameters");
  }
  ShadowResult r{.model = unlearned};
  const std::vector<double> anchor = unlearned.params().flatten();
  const PenaltyFn penalty = [&](const ParamSet& params, ParamSet& grads) {
    return ewc_penalty(params, anchor, fisher, config.alpha, &grads);
  };
  r.objective_curve = fine_tune(r.model, shadow_train,
                                {.epochs = config.epochs, .learning_rate = config.learning_rate, .seed = seed},
                                penalty);
  return r;
}

void save_shadow_checkpoint(const std::filesystem::path& path, const ParamSet& params,
                            const FisherDiag& fisher) {
  if (fisher.values.size() != params.total_len()) throw ShapeError("Fisher diagonal is not aligned");
  ParamSet out = params;
  out.add("fisher.diag", DenseMatrix(1, fisher.values.size(), fisher.values));
  write_checkpoint(path, out);
}

FisherDiag fisher_from_checkpoint(const ParamSet& checkpoint) {
  const DenseMatrix& m = checkpoint.at("fisher.diag");
  FisherDiag f;
  f.values.assign(m.values().begin(), m.values().end());
  return f;
}

}  // namespace mgpmia
