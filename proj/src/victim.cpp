#include "mgpmia/victim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mgpmia/adam.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/kv.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

constexpr std::size_t kMaxRejections = 1000;

std::string projector_name(int domain_id) { return "proj." + std::to_string(domain_id); }

// k distinct uniform nodes in [0, n) other than `exclude` (partial
// Fisher-Yates over an implicit index array when k is large relative to n).
std::vector<NodeId> sample_other_nodes(std::size_t n, NodeId exclude, std::size_t k, Rng& rng) {
  std::vector<NodeId> out;
  if (n <= 1 || k == 0) return out;
  k = std::min(k, n - 1);
  if (4 * k >= n) {
    std::vector<NodeId> pool;
    pool.reserve(n - 1);
    for (NodeId v = 0; v < n; ++v) {
      if (v != exclude) pool.push_back(v);
    }
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
  }
  while (out.size() < k) {
    const auto v = static_cast<NodeId>(rng.below(n));
    if (v == exclude || std::find(out.begin(), out.end(), v) != out.end()) continue;
    out.push_back(v);
  }
  return out;
}

// Uniform non-neighbor of u (u itself excluded); nullopt when none is found.
std::optional<NodeId> sample_non_neighbor(const Graph& graph, NodeId u, Rng& rng) {
  const std::size_t n = graph.num_nodes();
  if (n <= graph.degree(u) + 1) return std::nullopt;
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    const auto v = static_cast<NodeId>(rng.below(n));
    if (v != u && !graph.has_edge(u, v)) return v;
  }
  // Dense neighborhood: fall back to explicit enumeration.
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < n; ++v) {
    if (v != u && !graph.has_edge(u, v)) candidates.push_back(v);
  }
  return candidates[rng.below(candidates.size())];
}

std::vector<Edge> sample_negative_edges(const Graph& graph, std::size_t count, Rng& rng) {
  std::vector<Edge> out;
  const std::size_t n = graph.num_nodes();
  if (n < 2) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
      const auto u = static_cast<NodeId>(rng.below(n));
      const auto v = static_cast<NodeId>(rng.below(n));
      if (u != v && !graph.has_edge(u, v)) {
        out.push_back({u, v});
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kContrastive ? "contrastive" : "link_prediction";
}

ObjectiveKind parse_objective_kind(std::string_view text) {
  if (text == "contrastive") return ObjectiveKind::kContrastive;
  if (text == "link_prediction" || text == "linkpred" || text == "link") {
    return ObjectiveKind::kLinkPrediction;
  }
  throw ConfigError("unknown objective '" + std::string(text) + "'");
}

void SslObjective::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (edge_drop_rate < 0.0 || edge_drop_rate > 1.0 || feature_mask_rate < 0.0 ||
      feature_mask_rate > 1.0) {
    throw ConfigError("augmentation rates must lie in [0, 1]");
  }
}

VictimModel VictimModel::initialize(std::span<const DomainSpec> domains, const EncoderDims& dims,
                                    const SslObjective& objective, std::uint64_t seed) {
  objective.validate();
  if (domains.empty()) throw ConfigError("victim needs at least one domain");
  if (dims.layers < 1) throw ConfigError("encoder needs at least one layer");
  VictimModel m;
  m.dims_ = dims;
  m.objective_ = objective;
  m.init_seed = seed;
  const Rng root(seed);
  for (const DomainSpec& d : domains) {
    if (m.params_.index_of(projector_name(d.domain_id))) {
      throw ConfigError("duplicate domain id " + std::to_string(d.domain_id));
    }
    Rng rng = root.split(derive_seed(0x70726f6aULL, static_cast<std::uint64_t>(d.domain_id)));
    m.params_.add(projector_name(d.domain_id), DenseMatrix::glorot(d.feature_dim, dims.shared_dim, rng));
    m.domains_.push_back(d);
  }
  Rng enc = root.split("encoder");
  std::size_t in = dims.shared_dim;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::size_t out = l + 1 == dims.layers ? dims.emb_dim : dims.hidden_dim;
    m.params_.add("gcn." + std::to_string(l), DenseMatrix::glorot(in, out, enc));
    in = out;
  }
  return m;
}

std::size_t VictimModel::projector_index(int domain_id) const {
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (domains_[i].domain_id == domain_id) return i;
  }
  if (fallback_domain_ && *fallback_domain_ != domain_id) return projector_index(*fallback_domain_);
  throw MissingProjectorError("no projector for domain " + std::to_string(domain_id));
}

void VictimModel::set_fallback_domain(std::optional<int> domain_id) {
  if (domain_id) {
    const auto it = std::find_if(domains_.begin(), domains_.end(),
                                 [&](const DomainSpec& d) { return d.domain_id == *domain_id; });
    if (it == domains_.end()) throw MissingProjectorError("fallback domain has no projector");
  }
  fallback_domain_ = domain_id;
}

ForwardPass forward(const VictimModel& model, const Propagator& propagator,
                    const DenseMatrix& features, int domain_id) {
  ForwardPass pass;
  pass.projector = model.projector_index(domain_id);
  const DenseMatrix& proj = model.params()[pass.projector];
  if (features.cols() != proj.rows()) {
    throw ShapeError("domain " + std::to_string(domain_id) + " projector expects " +
                     std::to_string(proj.rows()) + " features, got " + std::to_string(features.cols()));
  }
  pass.projected = matmul(features, proj);
  pass.embeddings = gcn_forward(model.encoder_weights(), propagator, pass.projected, &pass.cache);
  return pass;
}

DenseMatrix backward(const VictimModel& model, const Propagator& propagator,
                     const DenseMatrix& features, const ForwardPass& pass,
                     DenseMatrix grad_embeddings, ParamSet& grads, bool want_input_grad) {
  const std::size_t np = model.num_projectors();
  const DenseMatrix grad_projected =
      gcn_backward(model.encoder_weights(), propagator, pass.cache, std::move(grad_embeddings),
                   grads.matrices().subspan(np), true);
  add_matmul_tn(features, grad_projected, grads[pass.projector]);
  if (!want_input_grad) return {};
  return matmul_nt(grad_projected, model.params()[pass.projector]);
}

DenseMatrix embed(const VictimModel& model, const Graph& graph, int domain_id) {
  return forward(model, Propagator::from_graph(graph), graph.features(), domain_id).embeddings;
}

Augmentation augment_graph(const Graph& graph, const SslObjective& objective, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> kept;
  for (const Edge& e : graph.edge_list()) {
    if (!rng.bernoulli(objective.edge_drop_rate)) kept.push_back(e);
  }
  Augmentation aug;
  aug.feature_mask.resize(graph.feature_dim());
  for (double& m : aug.feature_mask) m = rng.bernoulli(objective.feature_mask_rate) ? 0.0 : 1.0;
  DenseMatrix features = graph.features();
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] *= aug.feature_mask[j];
  }
  aug.graph = Graph::from_edges(graph.num_nodes(), kept, std::move(features), graph.domain_id());
  return aug;
}

std::uint64_t view_seed(std::uint64_t seed, std::size_t p) {
  return derive_seed(derive_seed(seed, "view"), static_cast<std::uint64_t>(p));
}

NodeSamples make_positive_negative(const Graph& graph, NodeId node, const SslObjective& objective,
                                   std::size_t num_positive, std::size_t num_negative,
                                   std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (node >= n) throw RangeError("sample node " + std::to_string(node) + " out of range");
  if (n < num_negative + 1) {
    throw DegenerateInputError("graph with " + std::to_string(n) + " nodes cannot supply " +
                               std::to_string(num_negative) + " negatives");
  }
  NodeSamples s;
  s.node = node;
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(node)));
  if (objective.kind == ObjectiveKind::kContrastive) {
    for (std::size_t p = 0; p < num_positive; ++p) {
      s.view_seeds.push_back(view_seed(seed, p));
      s.positives.push_back({static_cast<std::uint32_t>(p + 1), node});
    }
    s.negatives = sample_other_nodes(n, node, num_negative, rng);
    return s;
  }

  const auto nbrs = graph.neighbors(node);
  if (nbrs.empty()) throw NoPositiveError("node " + std::to_string(node) + " has no neighbors");
  if (nbrs.size() >= num_positive) {
    std::vector<NodeId> pool(nbrs.begin(), nbrs.end());
    for (std::size_t i = 0; i < num_positive; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      s.positives.push_back({0, pool[i]});
    }
  } else {
    for (std::size_t i = 0; i < num_positive; ++i) s.positives.push_back({0, nbrs[rng.below(nbrs.size())]});
  }
  const std::size_t non_neighbors = n - 1 - nbrs.size();
  if (non_neighbors == 0 && num_negative > 0) {
    throw DegenerateInputError("node " + std::to_string(node) + " is adjacent to every other node");
  }
  if (non_neighbors >= num_negative) {
    while (s.negatives.size() < num_negative) {
      const auto v = *sample_non_neighbor(graph, node, rng);
      if (std::find(s.negatives.begin(), s.negatives.end(), v) == s.negatives.end()) {
        s.negatives.push_back(v);
      }
    }
  } else {
    for (std::size_t i = 0; i < num_negative; ++i) s.negatives.push_back(*sample_non_neighbor(graph, node, rng));
  }
  return s;
}

SampleSet sample_nodes(const Graph& graph, std::span<const NodeId> nodes,
                       const SslObjective& objective, std::size_t num_positive,
                       std::size_t num_negative, std::uint64_t seed) {
  SampleSet set;
  set.num_positive = num_positive;
  set.num_negative = num_negative;
  if (objective.kind == ObjectiveKind::kContrastive) {
    for (std::size_t p = 0; p < num_positive; ++p) set.view_seeds.push_back(view_seed(seed, p));
  }
  set.nodes.reserve(nodes.size());
  for (NodeId v : nodes) {
    try {
      set.nodes.push_back(make_positive_negative(graph, v, objective, num_positive, num_negative, seed));
    } catch (const NoPositiveError&) {
      set.skipped.push_back(v);
    }
  }
  return set;
}

double task_loss(const VictimModel& model, const Graph& graph, std::uint64_t seed, ParamSet* grads) {
  const SslObjective& obj = model.objective();
  const int domain = graph.domain_id();
  const Propagator prop = Propagator::from_graph(graph);
  ForwardPass pass = forward(model, prop, graph.features(), domain);
  Rng rng(seed);
  const std::size_t n = graph.num_nodes();

  if (obj.kind == ObjectiveKind::kContrastive) {
    const Augmentation aug = augment_graph(graph, obj, rng.split("augment").next_u64());
    const Propagator aug_prop = Propagator::from_graph(aug.graph);
    ForwardPass aug_pass = forward(model, aug_prop, aug.graph.features(), domain);
    std::vector<ContrastiveTerm> terms(n);
    Rng neg_rng = rng.split("negatives");
    for (NodeId i = 0; i < n; ++i) {
      terms[i].anchor = i;
      terms[i].positive = i;
      terms[i].negatives = sample_other_nodes(n, i, obj.negatives, neg_rng);
    }
    if (grads == nullptr) {
      return contrastive_loss(pass.embeddings, aug_pass.embeddings, terms, obj.temperature, nullptr, nullptr);
    }
    DenseMatrix g0(pass.embeddings.rows(), pass.embeddings.cols());
    DenseMatrix g1(aug_pass.embeddings.rows(), aug_pass.embeddings.cols());
    const double loss = contrastive_loss(pass.embeddings, aug_pass.embeddings, terms, obj.temperature, &g0, &g1);
    backward(model, prop, graph.features(), pass, std::move(g0), *grads);
    backward(model, aug_prop, aug.graph.features(), aug_pass, std::move(g1), *grads);
    return loss;
  }

  const std::vector<Edge> positives = graph.edge_list();
  Rng neg_rng = rng.split("negatives");
  const std::vector<Edge> negatives = sample_negative_edges(graph, positives.size(), neg_rng);
  if (grads == nullptr) return linkpred_loss(pass.embeddings, positives, negatives, nullptr);
  DenseMatrix g(pass.embeddings.rows(), pass.embeddings.cols());
  const double loss = linkpred_loss(pass.embeddings, positives, negatives, &g);
  backward(model, prop, graph.features(), pass, std::move(g), *grads);
  return loss;
}

NodeObjective::NodeObjective(const Graph& graph, const SslObjective& objective, std::size_t layers,
                             std::uint64_t seed)
    : graph_(&graph), objective_(objective), layers_(layers), seed_(seed), builder_(graph) {
  if (objective_.kind == ObjectiveKind::kContrastive) {
    augmentation_ = std::make_unique<Augmentation>(augment_graph(graph, objective_, derive_seed(seed, "augment")));
    aug_builder_ = std::make_unique<LocalViewBuilder>(augmentation_->graph);
  }
}

double NodeObjective::loss(const VictimModel& model, NodeId node, ParamSet* grads,
                           std::vector<double>* feature_grad) {
  const Graph& g = *graph_;
  const int domain = g.domain_id();
  const bool want_input = feature_grad != nullptr;
  if (want_input) feature_grad->assign(g.feature_dim(), 0.0);
  Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(node)));

  if (objective_.kind == ObjectiveKind::kContrastive) {
    std::vector<NodeId> seeds{node};
    const auto negs = sample_other_nodes(g.num_nodes(), node, objective_.negatives, rng);
    seeds.insert(seeds.end(), negs.begin(), negs.end());
    const LocalView view = builder_.build(seeds, layers_);
    const NodeId self[] = {node};
    const LocalView aug_view = aug_builder_->build(self, layers_);
    ForwardPass pass = forward(model, view.propagator, view.features, domain);
    ForwardPass aug_pass = forward(model, aug_view.propagator, aug_view.features, domain);
    ContrastiveTerm term;
    term.anchor = view.seed_rows[0];
    term.positive = aug_view.seed_rows[0];
    term.negatives.assign(view.seed_rows.begin() + 1, view.seed_rows.end());
    if (grads == nullptr && !want_input) {
      return contrastive_loss(pass.embeddings, aug_pass.embeddings, {&term, 1}, objective_.temperature,
                              nullptr, nullptr);
    }
    DenseMatrix g0(pass.embeddings.rows(), pass.embeddings.cols());
    DenseMatrix g1(aug_pass.embeddings.rows(), aug_pass.embeddings.cols());
    const double loss = contrastive_loss(pass.embeddings, aug_pass.embeddings, {&term, 1},
                                         objective_.temperature, &g0, &g1);
    ParamSet scratch;
    ParamSet& target = grads != nullptr ? *grads : (scratch = model.params().zeros_like());
    const DenseMatrix dx0 = backward(model, view.propagator, view.features, pass, std::move(g0), target, want_input);
    const DenseMatrix dx1 =
        backward(model, aug_view.propagator, aug_view.features, aug_pass, std::move(g1), target, want_input);
    if (want_input) {
      const auto r0 = dx0.row(view.seed_rows[0]);
      const auto r1 = dx1.row(aug_view.seed_rows[0]);
      for (std::size_t j = 0; j < r0.size(); ++j) {
        (*feature_grad)[j] = r0[j] + r1[j] * augmentation_->feature_mask[j];
      }
    }
    return loss;
  }

  const auto nbrs = g.neighbors(node);
  if (nbrs.empty()) return 0.0;
  std::vector<NodeId> seeds{node};
  seeds.insert(seeds.end(), nbrs.begin(), nbrs.end());
  std::vector<NodeId> negs;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (auto v = sample_non_neighbor(g, node, rng)) negs.push_back(*v);
  }
  seeds.insert(seeds.end(), negs.begin(), negs.end());
  const LocalView view = builder_.build(seeds, layers_);
  std::vector<Edge> pos;
  std::vector<Edge> neg;
  const NodeId self = view.seed_rows[0];
  for (std::size_t i = 0; i < nbrs.size(); ++i) pos.push_back({self, view.seed_rows[1 + i]});
  for (std::size_t i = 0; i < negs.size(); ++i) neg.push_back({self, view.seed_rows[1 + nbrs.size() + i]});
  ForwardPass pass = forward(model, view.propagator, view.features, domain);
  if (grads == nullptr && !want_input) return linkpred_loss(pass.embeddings, pos, neg, nullptr);
  DenseMatrix g0(pass.embeddings.rows(), pass.embeddings.cols());
  const double loss = linkpred_loss(pass.embeddings, pos, neg, &g0);
  ParamSet scratch;
  ParamSet& target = grads != nullptr ? *grads : (scratch = model.params().zeros_like());
  const DenseMatrix dx = backward(model, view.propagator, view.features, pass, std::move(g0), target, want_input);
  if (want_input) {
    const auto r = dx.row(self);
    std::copy(r.begin(), r.end(), feature_grad->begin());
  }
  return loss;
}

VictimModel pretrain_multidomain(std::span<const Graph> graphs, std::span<const NodeSet> members,
                                 const SslObjective& objective, const EncoderDims& dims,
                                 const TrainConfig& config, std::vector<double>* loss_curve) {
  if (graphs.empty()) throw ConfigError("pretraining needs at least one graph");
  if (members.size() != graphs.size()) throw ConfigError("one member set per graph required");
  if (config.epochs < 1) throw ConfigError("pretraining needs at least one epoch");
  std::vector<Graph> train_graphs;
  std::vector<DomainSpec> domains;
  for (std::size_t d = 0; d < graphs.size(); ++d) {
    if (members[d].empty()) throw DegenerateInputError("empty member set for graph " + std::to_string(d));
    train_graphs.push_back(induced_subgraph(graphs[d], members[d]));
    domains.push_back({graphs[d].domain_id(), graphs[d].feature_dim()});
  }
  VictimModel model = VictimModel::initialize(domains, dims, objective, config.seed);

  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return graphs[a].domain_id() < graphs[b].domain_id(); });

  AdamState adam(model.params(), {.learning_rate = config.learning_rate});
  ParamSet grads = model.params().zeros_like();
  const Rng root(config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    grads.set_zero();
    double total = 0.0;
    for (std::size_t d : order) {
      const int domain = graphs[d].domain_id();
      const std::uint64_t step_seed =
          derive_seed(root.split(static_cast<std::uint64_t>(epoch)).seed(), static_cast<std::uint64_t>(domain));
      const std::string where = "epoch " + std::to_string(epoch) + ", domain " + std::to_string(domain);
      double loss = 0.0;
      try {
        loss = task_loss(model, train_graphs[d], step_seed, &grads);
      } catch (const NumericError& e) {
        throw NumericError("pretraining diverged at " + where + ": " + e.what());
      }
      if (!std::isfinite(loss) || !grads.all_finite()) {
        throw NumericError("pretraining produced non-finite values at " + where);
      }
      total += loss;
    }
    if (loss_curve != nullptr) loss_curve->push_back(total);
    adam_step(adam, model.params(), grads);
  }
  model.trained_epochs = config.epochs;
  return model;
}

std::vector<double> fine_tune(VictimModel& model, const Graph& graph, const TrainConfig& config,
                              const PenaltyFn& penalty) {
  std::vector<double> curve;
  curve.reserve(config.epochs);
  AdamState adam(model.params(), {.learning_rate = config.learning_rate});
  ParamSet grads = model.params().zeros_like();
  const Rng root(config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    grads.set_zero();
    double value = task_loss(model, graph, root.split(static_cast<std::uint64_t>(epoch)).seed(), &grads);
    if (penalty) value += penalty(model.params(), grads);
    if (!std::isfinite(value) || !grads.all_finite()) {
      throw NumericError("fine-tuning diverged at epoch " + std::to_string(epoch));
    }
    curve.push_back(value);
    adam_step(adam, model.params(), grads);
  }
  model.trained_epochs += config.epochs;
  return curve;
}

void save_victim(const VictimModel& model, const std::filesystem::path& path) {
  write_checkpoint(path, model.params());
  KeyValues meta;
  const SslObjective& o = model.objective();
  meta["objective"] = std::string(to_string(o.kind));
  meta["temperature"] = format_double(o.temperature);
  meta["negatives"] = std::to_string(o.negatives);
  meta["edge_drop_rate"] = format_double(o.edge_drop_rate);
  meta["feature_mask_rate"] = format_double(o.feature_mask_rate);
  std::string domains;
  for (const DomainSpec& d : model.domains()) {
    if (!domains.empty()) domains += ",";
    domains += std::to_string(d.domain_id) + ":" + std::to_string(d.feature_dim);
  }
  meta["domains"] = domains;
  meta["shared_dim"] = std::to_string(model.dims().shared_dim);
  meta["hidden_dim"] = std::to_string(model.dims().hidden_dim);
  meta["emb_dim"] = std::to_string(model.dims().emb_dim);
  meta["layers"] = std::to_string(model.dims().layers);
  meta["epochs"] = std::to_string(model.trained_epochs);
  meta["seed"] = std::to_string(model.init_seed);
  meta["fallback_domain"] = model.fallback_domain() ? std::to_string(*model.fallback_domain()) : "none";
  std::ofstream out(path.string() + ".meta");
  if (!out) throw IoError("cannot write " + path.string() + ".meta");
  write_key_values(out, meta);
}

VictimModel load_victim(const std::filesystem::path& path) {
  const KeyValues meta = read_key_values(path.string() + ".meta");
  SslObjective o;
  o.kind = parse_objective_kind(kv_string(meta, "objective"));
  o.temperature = kv_double(meta, "temperature");
  o.negatives = static_cast<std::size_t>(kv_int(meta, "negatives"));
  o.edge_drop_rate = kv_double(meta, "edge_drop_rate");
  o.feature_mask_rate = kv_double(meta, "feature_mask_rate");
  EncoderDims dims;
  dims.shared_dim = static_cast<std::size_t>(kv_int(meta, "shared_dim"));
  dims.hidden_dim = static_cast<std::size_t>(kv_int(meta, "hidden_dim"));
  dims.emb_dim = static_cast<std::size_t>(kv_int(meta, "emb_dim"));
  dims.layers = static_cast<std::size_t>(kv_int(meta, "layers"));
  std::vector<DomainSpec> domains;
  std::stringstream ss(kv_string(meta, "domains"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("bad domains entry '" + item + "'");
    domains.push_back({std::stoi(item.substr(0, colon)),
                       static_cast<std::size_t>(std::stoull(item.substr(colon + 1)))});
  }
  VictimModel model = VictimModel::initialize(domains, dims, o, static_cast<std::uint64_t>(kv_int(meta, "seed")));
  ParamSet params = read_checkpoint(path);
  if (!params.same_layout(model.params())) throw IoError("checkpoint layout does not match its metadata");
  model.params() = std::move(params);
  model.trained_epochs = static_cast<std::size_t>(kv_int(meta, "epochs"));
  const std::string& fb = kv_string(meta, "fallback_domain");
  if (fb != "none") model.set_fallback_domain(std::stoi(fb));
  return model;
}

}  // namespace mgpmia
