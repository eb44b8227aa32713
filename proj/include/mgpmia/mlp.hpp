#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgpmia/matrix.hpp"
#include "mgpmia/params.hpp"

namespace mgpmia {

class Rng;

inline constexpr std::size_t kDefaultMlpHidden = 256;

struct MlpCache {
  DenseMatrix input;
  DenseMatrix hidden_pre;  // before the rectifier
  DenseMatrix hidden;
};

// Two-layer perceptron: logits = relu(x W1 + b1) W2 + b2.
// Parameters are named mlp.w1, mlp.b1, mlp.w2, mlp.b2 (biases are 1-row).
class Mlp {
 public:
  static Mlp init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, Rng& rng);
  static Mlp zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim);

  std::size_t input_dim() const { return params_[0].rows(); }
  std::size_t hidden_dim() const { return params_[0].cols(); }
  std::size_t output_dim() const { return params_[2].cols(); }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  DenseMatrix forward(const DenseMatrix& x, MlpCache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> x) const;

  // Accumulates parameter gradients for dL/dlogits into grads.
  void backward(const MlpCache& cache, const DenseMatrix& grad_logits, ParamSet& grads) const;

 private:
  ParamSet params_;
};

}  // namespace mgpmia
