#include "mgpmia/mlp.hpp"

#include <string>

#include "mgpmia/errors.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

Mlp Mlp::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, Rng& rng) {
  Mlp mlp;
  mlp.params_.add("mlp.w1", DenseMatrix::glorot(input_dim, hidden_dim, rng));
  mlp.params_.add("mlp.b1", DenseMatrix(1, hidden_dim));
  mlp.params_.add("mlp.w2", DenseMatrix::glorot(hidden_dim, output_dim, rng));
  mlp.params_.add("mlp.b2", DenseMatrix(1, output_dim));
  return mlp;
}

Mlp Mlp::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim) {
  Mlp mlp;
  mlp.params_.add("mlp.w1", DenseMatrix(input_dim, hidden_dim));
  mlp.params_.add("mlp.b1", DenseMatrix(1, hidden_dim));
  mlp.params_.add("mlp.w2", DenseMatrix(hidden_dim, output_dim));
  mlp.params_.add("mlp.b2", DenseMatrix(1, output_dim));
  return mlp;
}

DenseMatrix Mlp::forward(const DenseMatrix& x, MlpCache* cache) const {
  if (x.cols() != input_dim()) {
    throw ShapeError("MLP expects " + std::to_string(input_dim()) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  DenseMatrix pre = matmul(x, params_[0]);
  for (std::size_t i = 0; i < pre.rows(); ++i) {
    auto row = pre.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += params_[1](0, j);
  }
  DenseMatrix hidden = pre;
  for (double& v : hidden.values()) v = v > 0.0 ? v : 0.0;
  DenseMatrix logits = matmul(hidden, params_[2]);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += params_[3](0, j);
  }
  if (cache != nullptr) {
    cache->input = x;
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return logits;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  DenseMatrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const DenseMatrix out = forward(in);
  return {out.values().begin(), out.values().end()};
}

void Mlp::backward(const MlpCache& cache, const DenseMatrix& grad_logits, ParamSet& grads) const {
  add_matmul_tn(cache.hidden, grad_logits, grads[2]);
  for (std::size_t i = 0; i < grad_logits.rows(); ++i) {
    for (std::size_t j = 0; j < grad_logits.cols(); ++j) grads[3](0, j) += grad_logits(i, j);
  }
  DenseMatrix grad_hidden = matmul_nt(grad_logits, params_[2]);
  const auto pre = cache.hidden_pre.values();
  auto gh = grad_hidden.values();
  for (std::size_t i = 0; i < gh.size(); ++i) {
    if (pre[i] <= 0.0) gh[i] = 0.0;
  }
  add_matmul_tn(cache.input, grad_hidden, grads[0]);
  for (std::size_t i = 0; i < grad_hidden.rows(); ++i) {
    for (std::size_t j = 0; j < grad_hidden.cols(); ++j) grads[1](0, j) += grad_hidden(i, j);
  }
}

}  // namespace mgpmia
