#include "mgpmia/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mgpmia/errors.hpp"

namespace mgpmia {

namespace {

void check_finite(double value, const char* loss, std::size_t term) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string(loss) + ": non-finite value at term " + std::to_string(term));
  }
}

}  // namespace

double cosine_sim(std::span<const double> a, std::span<const double> b, bool* degenerate) {
  if (a.size() != b.size()) throw ShapeError("cosine_sim: length mismatch");
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  if (degenerate != nullptr) *degenerate = false;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void add_cosine_grad(std::span<const double> a, std::span<const double> b, double scale,
                     std::span<double> grad_a, std::span<double> grad_b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return;
  const double inv = 1.0 / (na * nb);
  const double c = dot(a, b) * inv;
  const double ca = c / (na * na);
  const double cb = c / (nb * nb);
  for (std::size_t j = 0; j < a.size(); ++j) {
    grad_a[j] += scale * (b[j] * inv - ca * a[j]);
    grad_b[j] += scale * (a[j] * inv - cb * b[j]);
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double contrastive_loss(const DenseMatrix& anchor_view, const DenseMatrix& positive_view,
                        std::span<const ContrastiveTerm> terms, double temperature,
                        DenseMatrix* grad_anchor, DenseMatrix* grad_positive) {
  if (temperature <= 0.0) throw RangeError("contrastive temperature must be > 0");
  if (anchor_view.cols() != positive_view.cols()) throw ShapeError("contrastive_loss: view dims differ");
  if (terms.empty()) return 0.0;
  const double inv_t = 1.0 / temperature;
  const double scale = 1.0 / static_cast<double>(terms.size());
  double total = 0.0;
  std::vector<double> logits;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const ContrastiveTerm& term = terms[t];
    const auto a = anchor_view.row(term.anchor);
    const auto p = positive_view.row(term.positive);
    logits.assign(1 + term.negatives.size(), 0.0);
    logits[0] = cosine_sim(a, p) * inv_t;
    for (std::size_t k = 0; k < term.negatives.size(); ++k) {
      logits[k + 1] = cosine_sim(a, anchor_view.row(term.negatives[k])) * inv_t;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const double lse = mx + std::log(z);
    const double loss = lse - logits[0];
    check_finite(loss, "contrastive_loss", t);
    total += loss;
    if (grad_anchor == nullptr) continue;
    // d loss / d logit_k = softmax_k - [k == 0]
    const double w0 = (std::exp(logits[0] - lse) - 1.0) * inv_t * scale;
    add_cosine_grad(a, p, w0, grad_anchor->row(term.anchor), grad_positive->row(term.positive));
    for (std::size_t k = 0; k < term.negatives.size(); ++k) {
      const double wk = std::exp(logits[k + 1] - lse) * inv_t * scale;
      const NodeId neg = term.negatives[k];
      add_cosine_grad(a, anchor_view.row(neg), wk, grad_anchor->row(term.anchor), grad_anchor->row(neg));
    }
  }
  return total * scale;
}

double linkpred_loss(const DenseMatrix& embeddings, std::span<const Edge> positives,
                     std::span<const Edge> negatives, DenseMatrix* grad) {
  const std::size_t count = positives.size() + negatives.size();
  if (count == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(count);
  double total = 0.0;
  auto accumulate = [&](std::span<const Edge> pairs, bool positive, std::size_t offset) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto hu = embeddings.row(pairs[i].u);
      const auto hv = embeddings.row(pairs[i].v);
      const double s = dot(hu, hv);
      const double loss = positive ? softplus(-s) : softplus(s);
      check_finite(loss, "linkpred_loss", offset + i);
      total += loss;
      if (grad == nullptr) continue;
      const double ds = (positive ? sigmoid(s) - 1.0 : sigmoid(s)) * scale;
      auto gu = grad->row(pairs[i].u);
      auto gv = grad->row(pairs[i].v);
      for (std::size_t j = 0; j < hu.size(); ++j) {
        gu[j] += ds * hv[j];
        gv[j] += ds * hu[j];
      }
    }
  };
  accumulate(positives, true, 0);
  accumulate(negatives, false, positives.size());
  return total * scale;
}

double cross_entropy(const DenseMatrix& logits, std::span<const int> labels, DenseMatrix* grad) {
  if (labels.size() != logits.rows()) throw ShapeError("cross_entropy: label count mismatch");
  if (labels.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const auto label = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || label >= row.size()) throw RangeError("cross_entropy: label out of range");
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double l : row) z += std::exp(l - mx);
    const double lse = mx + std::log(z);
    const double loss = lse - row[label];
    check_finite(loss, "cross_entropy", i);
    total += loss;
    if (grad == nullptr) continue;
    auto g = grad->row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      g[j] += (std::exp(row[j] - lse) - (j == label ? 1.0 : 0.0)) * scale;
    }
  }
  return total * scale;
}

double mse_on_scores(std::span<const DenseMatrix> views, std::span<const ScoreTerm> terms,
                     double normalizer, std::span<DenseMatrix> grads) {
  if (normalizer <= 0.0) throw RangeError("mse_on_scores: normalizer must be > 0");
  if (!grads.empty() && grads.size() != views.size()) throw ShapeError("mse_on_scores: grads misaligned");
  double total = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const ScoreTerm& term = terms[t];
    const auto a = views[term.view_a].row(term.row_a);
    const auto b = views[term.view_b].row(term.row_b);
    const double diff = cosine_sim(a, b) - term.target;
    check_finite(diff, "mse_on_scores", t);
    total += diff * diff;
    if (grads.empty()) continue;
    add_cosine_grad(a, b, 2.0 * diff / normalizer, grads[term.view_a].row(term.row_a),
                    grads[term.view_b].row(term.row_b));
  }
  return total / normalizer;
}

}  // namespace mgpmia
