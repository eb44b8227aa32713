#include "mgpmia/adam.hpp"

#include <cmath>

#include "mgpmia/errors.hpp"

namespace mgpmia {

AdamState::AdamState(const ParamSet& like, AdamConfig cfg)
    : config(cfg), first_moment(like.zeros_like()), second_moment(like.zeros_like()) {}

void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads) {
  if (!params.same_layout(grads) || !params.same_layout(state.first_moment)) {
    throw ShapeError("adam_step: parameter, gradient and state layouts differ");
  }
  ++state.step;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.count(); ++i) {
    auto p = params[i].values();
    const auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace mgpmia
