#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgpmia/graph.hpp"
#include "mgpmia/matrix.hpp"

namespace mgpmia {

// Cosine similarity. A zero vector on either side yields 0 and sets
// *degenerate (when given) instead of raising.
double cosine_sim(std::span<const double> a, std::span<const double> b, bool* degenerate = nullptr);

// Adds scale * d cos(a, b) / da to grad_a and scale * d cos(a, b) / db to
// grad_b. No-op for zero vectors.
void add_cosine_grad(std::span<const double> a, std::span<const double> b, double scale,
                     std::span<double> grad_a, std::span<double> grad_b);

double sigmoid(double x);
// log(1 + exp(x)) without overflow.
double softplus(double x);

// One InfoNCE term: anchor row of the anchor view, its positive row in the
// positive view, and negative rows taken from the anchor view.
struct ContrastiveTerm {
  NodeId anchor = 0;
  NodeId positive = 0;
  std::vector<NodeId> negatives;
};

// Mean over terms of -log softmax at the positive, with logits cos(.,.)/tau.
// Gradients are accumulated (not overwritten) when the pointers are non-null.
double contrastive_loss(const DenseMatrix& anchor_view, const DenseMatrix& positive_view,
                        std::span<const ContrastiveTerm> terms, double temperature,
                        DenseMatrix* grad_anchor, DenseMatrix* grad_positive);

// Mean binary cross-entropy of sigmoid(h_u . h_v) over positive pairs
// (label 1) and negative pairs (label 0).
double linkpred_loss(const DenseMatrix& embeddings, std::span<const Edge> positives,
                     std::span<const Edge> negatives, DenseMatrix* grad);

// Mean softmax cross-entropy; labels index the logit columns.
double cross_entropy(const DenseMatrix& logits, std::span<const int> labels, DenseMatrix* grad);

// A cosine similarity between two embedding rows, possibly from different
// views, with the score it should match.
struct ScoreTerm {
  std::size_t view_a = 0;
  NodeId row_a = 0;
  std::size_t view_b = 0;
  NodeId row_b = 0;
  double target = 0.0;
};

// sum_t (cos(view_a[row_a], view_b[row_b]) - target_t)^2 / normalizer.
// grads, when non-empty, must align with views and is accumulated into.
double mse_on_scores(std::span<const DenseMatrix> views, std::span<const ScoreTerm> terms,
                     double normalizer, std::span<DenseMatrix> grads);

}  // namespace mgpmia
