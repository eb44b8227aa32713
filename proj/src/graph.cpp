#include "mgpmia/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "mgpmia/errors.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Splits on runs of spaces/tabs; ignores a trailing '\r'.
std::vector<std::string_view> tokenize(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, DenseMatrix features,
                        int domain_id, IngestStats* stats) {
  if (features.rows() != num_nodes) {
    throw ShapeError("feature rows " + std::to_string(features.rows()) + " != num_nodes " +
                     std::to_string(num_nodes));
  }
  IngestStats local;
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes) {
      throw RangeError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") references node >= " + std::to_string(num_nodes));
    }
    if (e.u == e.v) {
      ++local.self_loops_dropped;
      continue;
    }
    canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  std::sort(canon.begin(), canon.end());
  const auto last = std::unique(canon.begin(), canon.end());
  local.duplicates_dropped = static_cast<std::size_t>(canon.end() - last);
  canon.erase(last, canon.end());

  Graph g;
  g.domain_id_ = domain_id;
  g.features_ = std::move(features);
  g.offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : canon) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.neighbors_.resize(2 * canon.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // canon is sorted by (u, v) so each list fills in ascending order for the
  // u side; the v side needs a sort afterwards.
  for (const Edge& e : canon) {
    g.neighbors_[cursor[e.u]++] = e.v;
    g.neighbors_[cursor[e.v]++] = e.u;
  }
  for (std::size_t u = 0; u < num_nodes; ++u) {
    std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
              g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
  }
  if (stats != nullptr) *stats = local;
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::average_degree() const {
  const std::size_t n = num_nodes();
  return n == 0 ? 0.0 : 2.0 * static_cast<double>(num_edges()) / static_cast<double>(n);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

Graph Graph::with_features(DenseMatrix features) const {
  if (features.rows() != num_nodes()) {
    throw ShapeError("replacement features have " + std::to_string(features.rows()) +
                     " rows, graph has " + std::to_string(num_nodes()) + " nodes");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph load_graph(const std::filesystem::path& edge_path, const std::filesystem::path& feature_path,
                 int domain_id, IngestStats* stats) {
  std::ifstream features_in(feature_path);
  if (!features_in) throw IoError("cannot open feature file " + feature_path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  // Header.
  while (std::getline(features_in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2 || !parse_number(tokens[0], n) || !parse_number(tokens[1], d)) {
      throw ParseError(feature_path.string(), line_no, "expected header 'n d'");
    }
    break;
  }
  if (line_no == 0) throw ParseError(feature_path.string(), 1, "missing header");
  DenseMatrix features(n, d);
  std::size_t rows_read = 0;
  while (std::getline(features_in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (rows_read >= n) {
      throw ShapeError(feature_path.string() + ": more than " + std::to_string(n) +
                       " feature rows");
    }
    if (tokens.size() != d) {
      throw ParseError(feature_path.string(), line_no,
                       "expected " + std::to_string(d) + " values, got " +
                           std::to_string(tokens.size()));
    }
    auto row = features.row(rows_read);
    for (std::size_t j = 0; j < d; ++j) {
      if (!parse_number(tokens[j], row[j]) || !std::isfinite(row[j])) {
        throw ParseError(feature_path.string(), line_no,
                         "bad real '" + std::string(tokens[j]) + "'");
      }
    }
    ++rows_read;
  }
  if (rows_read != n) {
    throw ShapeError(feature_path.string() + ": header declares " + std::to_string(n) +
                     " rows, found " + std::to_string(rows_read));
  }

  std::ifstream edges_in(edge_path);
  if (!edges_in) throw IoError("cannot open edge file " + edge_path.string());
  std::vector<Edge> edges;
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '#') continue;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    Edge e;
    if (tokens.size() != 2 || !parse_number(tokens[0], e.u) || !parse_number(tokens[1], e.v)) {
      throw ParseError(edge_path.string(), line_no, "expected 'u<TAB>v'");
    }
    if (e.u >= n || e.v >= n) {
      throw RangeError(edge_path.string() + ":" + std::to_string(line_no) + ": node id >= " +
                       std::to_string(n));
    }
    edges.push_back(e);
  }
  return Graph::from_edges(n, edges, std::move(features), domain_id, stats);
}

void write_graph(const Graph& graph, const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path) {
  std::ofstream edges_out(edge_path);
  if (!edges_out) throw IoError("cannot write " + edge_path.string());
  for (const Edge& e : graph.edge_list()) edges_out << e.u << '\t' << e.v << '\n';
  std::ofstream features_out(feature_path);
  if (!features_out) throw IoError("cannot write " + feature_path.string());
  features_out << graph.num_nodes() << ' ' << graph.feature_dim() << '\n';
  features_out << std::setprecision(17);
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    const auto row = graph.features().row(i);
    for (std::size_t j = 0; j < row.size(); ++j) features_out << (j ? " " : "") << row[j];
    features_out << '\n';
  }
}

MembershipSplit split_half(const Graph& graph, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (n < 2) throw DegenerateInputError("split_half needs at least 2 nodes");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(seed);
  rng.shuffle(std::span<NodeId>(order));
  const std::size_t half = (n + 1) / 2;
  MembershipSplit split;
  split.members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  split.nonmembers.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  std::sort(split.members.begin(), split.members.end());
  std::sort(split.nonmembers.begin(), split.nonmembers.end());
  return split;
}

GraphPartition partition_shadow(const Graph& graph, double unlearn_fraction, std::uint64_t seed) {
  if (!(unlearn_fraction > 0.0 && unlearn_fraction < 1.0)) {
    throw DegenerateInputError("unlearn_fraction must lie in (0, 1)");
  }
  const std::size_t n = graph.num_nodes();
  const auto unlearn = static_cast<std::size_t>(std::llround(unlearn_fraction * static_cast<double>(n)));
  const std::size_t rest = n - std::min(unlearn, n);
  const std::size_t train = (rest + 1) / 2;
  const std::size_t test = rest - train;
  if (unlearn == 0 || train == 0 || test == 0) {
    throw DegenerateInputError("shadow partition of " + std::to_string(n) + " nodes at fraction " +
                               std::to_string(unlearn_fraction) + " yields an empty set (" +
                               std::to_string(unlearn) + "/" + std::to_string(train) + "/" +
                               std::to_string(test) + ")");
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(seed);
  rng.shuffle(std::span<NodeId>(order));
  GraphPartition p;
  p.seed = seed;
  auto it = order.begin();
  p.unlearn_nodes.assign(it, it + static_cast<std::ptrdiff_t>(unlearn));
  it += static_cast<std::ptrdiff_t>(unlearn);
  p.shadow_train_nodes.assign(it, it + static_cast<std::ptrdiff_t>(train));
  it += static_cast<std::ptrdiff_t>(train);
  p.shadow_test_nodes.assign(it, order.end());
  std::sort(p.unlearn_nodes.begin(), p.unlearn_nodes.end());
  std::sort(p.shadow_train_nodes.begin(), p.shadow_train_nodes.end());
  std::sort(p.shadow_test_nodes.begin(), p.shadow_test_nodes.end());
  return p;
}

Graph induced_subgraph(const Graph& graph, std::span<const NodeId> nodes) {
  NodeSet sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> local(graph.num_nodes(), kAbsent);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= graph.num_nodes()) {
      throw RangeError("induced_subgraph: node " + std::to_string(sorted[i]) + " >= " +
                       std::to_string(graph.num_nodes()));
    }
    local[sorted[i]] = static_cast<NodeId>(i);
  }
  DenseMatrix features(sorted.size(), graph.feature_dim());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const NodeId u = sorted[i];
    std::copy(graph.features().row(u).begin(), graph.features().row(u).end(),
              features.row(i).begin());
    for (NodeId v : graph.neighbors(u)) {
      if (u < v && local[v] != kAbsent) edges.push_back({local[u], local[v]});
    }
  }
  return Graph::from_edges(sorted.size(), edges, std::move(features), graph.domain_id());
}

Graph perturb_edges(const Graph& graph, double budget_fraction, std::uint64_t seed, PerturbStats* stats) {
  if (!(budget_fraction >= 0.0 && budget_fraction <= 1.0)) {
    throw RangeError("perturbation budget must lie in [0, 1]");
  }
  const std::size_t n = graph.num_nodes();
  const auto actions =
      static_cast<std::size_t>(std::llround(budget_fraction * static_cast<double>(graph.num_edges())));
  if (stats != nullptr) *stats = {};
  if (actions == 0) return graph;

  std::vector<Edge> edges = graph.edge_list();
  std::unordered_set<std::uint64_t> present;
  present.reserve(edges.size() * 2 + actions);
  for (const Edge& e : edges) present.insert(edge_key(e.u, e.v));
  const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;

  Rng rng(seed);
  for (std::size_t a = 0; a < actions; ++a) {
    bool remove = rng.bernoulli(0.5);
    if (edges.empty()) remove = false;
    if (edges.size() >= max_edges) remove = true;
    if (edges.empty() && max_edges == 0) break;
    if (remove) {
      const std::size_t idx = rng.below(edges.size());
      present.erase(edge_key(edges[idx].u, edges[idx].v));
      edges[idx] = edges.back();
      edges.pop_back();
      if (stats != nullptr) ++stats->deletions;
    } else {
      while (true) {
        const auto u = static_cast<NodeId>(rng.below(n));
        const auto v = static_cast<NodeId>(rng.below(n));
        if (u == v || present.contains(edge_key(u, v))) continue;
        present.insert(edge_key(u, v));
        edges.push_back({std::min(u, v), std::max(u, v)});
        if (stats != nullptr) ++stats->insertions;
        break;
      }
    }
  }
  return Graph::from_edges(n, edges, graph.features(), graph.domain_id());
}

std::uint64_t graph_fingerprint(const Graph& graph) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(graph.num_nodes());
  mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(graph.domain_id())));
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    mix(graph.degree(u));
    for (NodeId v : graph.neighbors(u)) mix(v);
  }
  for (double x : graph.features().values()) mix(std::bit_cast<std::uint64_t>(x));
  return h;
}

}  // namespace mgpmia
