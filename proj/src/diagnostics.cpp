#include "mgpmia/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "mgpmia/errors.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

constexpr std::size_t kMaxPowerIterations = 100000;

void normalize(std::vector<double>& v) {
  const double n = norm2(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

void orthogonalize(std::vector<double>& v, const std::vector<EigenPair>& found) {
  for (const EigenPair& e : found) {
    const double d = dot(v, e.vector);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * e.vector[i];
  }
}

std::vector<double> multiply(const DenseMatrix& a, const std::vector<double>& v) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

void write_csv_value(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

}  // namespace

std::vector<EigenPair> top_eigenpairs(const DenseMatrix& a, std::size_t k, double tolerance) {
  if (a.rows() != a.cols()) throw ShapeError("top_eigenpairs: matrix is not square");
  const std::size_t d = a.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += a(i, i);
  std::vector<EigenPair> found;
  if (trace <= 0.0) return found;

  for (std::size_t c = 0; c < std::min(k, d); ++c) {
    // Deterministic start with no special alignment to the coordinate axes.
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>((i * 7 + c * 3) % 11);
    orthogonalize(v, found);
    normalize(v);
    double value = 0.0;
    for (std::size_t it = 0; it < kMaxPowerIterations; ++it) {
      std::vector<double> w = multiply(a, v);
      orthogonalize(w, found);  // deflation against converged vectors
      const double n = norm2(w);
      if (n <= tolerance * trace) {
        value = 0.0;
        break;
      }
      for (double& x : w) x /= n;
      double change = 0.0;
      for (std::size_t i = 0; i < d; ++i) change = std::max(change, std::abs(w[i] - v[i]));
      v = std::move(w);
      value = n;
      if (change < tolerance) break;
    }
    if (value <= tolerance * trace) break;  // remaining spectrum is zero
    orthogonalize(v, found);
    normalize(v);
    value = dot(v, multiply(a, v));
    const auto first = std::find_if(v.begin(), v.end(), [](double x) { return std::abs(x) > 1e-12; });
    if (first != v.end() && *first < 0.0) {
      for (double& x : v) x = -x;
    }
    found.push_back({value, std::move(v)});
  }
  return found;
}

PcaResult pca_project(const DenseMatrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (k < 1 || n < k) throw RangeError("pca_project: need n >= k >= 1");
  DenseMatrix centered = x;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, j) -= mean;
  }
  DenseMatrix cov = matmul_tn(centered, centered);
  cov *= 1.0 / static_cast<double>(std::max<std::size_t>(n - 1, 1));
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);

  const std::vector<EigenPair> pairs = top_eigenpairs(cov, k);
  PcaResult r;
  r.explained_variance_ratio.assign(k, 0.0);
  r.rank_deficient = pairs.size() < k;
  r.components = DenseMatrix(pairs.size(), d);
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    std::copy(pairs[c].vector.begin(), pairs[c].vector.end(), r.components.row(c).begin());
    r.explained_variance_ratio[c] = pairs[c].value / trace;
  }
  r.projection = matmul_nt(centered, r.components);
  return r;
}

std::vector<double> robustness_probe(const VictimModel& model, const Graph& graph,
                                     std::span<const NodeId> nodes, double budget,
                                     std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw RangeError("robustness_probe: trials must be >= 1");
  for (NodeId v : nodes) {
    if (v >= graph.num_nodes()) throw RangeError("robustness_probe: node " + std::to_string(v) + " out of range");
  }
  const DenseMatrix original = embed(model, graph);
  std::vector<double> total(nodes.size(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const DenseMatrix perturbed = embed(model, perturb_edges(graph, budget, derive_seed(seed, t)));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      total[i] += cosine_sim(original.row(nodes[i]), perturbed.row(nodes[i]));
    }
  }
  for (double& s : total) s /= static_cast<double>(trials);
  return total;
}

DistributionSummary summarize(std::span<const double> values) {
  DistributionSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
  }
  return s;
}

void write_pca_csv(std::ostream& out, const PcaResult& pca, std::span<const NodeId> nodes,
                   std::span<const int> labels) {
  if (nodes.size() != pca.projection.rows() || labels.size() != nodes.size()) {
    throw ShapeError("write_pca_csv: row count mismatch");
  }
  out << "node,label";
  for (std::size_t c = 0; c < pca.projection.cols(); ++c) out << ",pc" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << nodes[i] << ',' << labels[i];
    for (double v : pca.projection.row(i)) {
      out << ',';
      write_csv_value(out, v);
    }
    out << '\n';
  }
}

void write_robustness_csv(std::ostream& out, std::span<const NodeId> nodes, std::span<const int> labels,
                          std::span<const double> similarity) {
  if (nodes.size() != labels.size() || nodes.size() != similarity.size()) {
    throw ShapeError("write_robustness_csv: row count mismatch");
  }
  out << "node,label,similarity\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << nodes[i] << ',' << labels[i] << ',';
    write_csv_value(out, similarity[i]);
    out << '\n';
  }
}

}  // namespace mgpmia
