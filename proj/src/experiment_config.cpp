#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "mgpmia/errors.hpp"
#include "mgpmia/experiment.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

double to_double(std::string_view key, const std::string& text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(std::string_view key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t to_size(std::string_view key, const std::string& text) {
  return static_cast<std::size_t>(to_u64(key, text));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

bool known_attack(std::string_view name) {
  if (name == kMgpMia || name == kWithoutUnlearning || name == kWithoutIncremental) return true;
  for (BaselineKind k : all_baselines()) {
    if (to_string(k) == name) return true;
  }
  return false;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"objective", [](ExperimentConfig& c, const std::string& v) { c.objective.kind = parse_objective_kind(v); }},
      {"temperature", [](ExperimentConfig& c, const std::string& v) { c.objective.temperature = to_double("temperature", v); }},
      {"ssl_negatives", [](ExperimentConfig& c, const std::string& v) { c.objective.negatives = to_size("ssl_negatives", v); }},
      {"edge_drop_rate", [](ExperimentConfig& c, const std::string& v) { c.objective.edge_drop_rate = to_double("edge_drop_rate", v); }},
      {"feature_mask_rate", [](ExperimentConfig& c, const std::string& v) { c.objective.feature_mask_rate = to_double("feature_mask_rate", v); }},
      {"lambda", [](ExperimentConfig& c, const std::string& v) { c.unlearn.lambda = to_double("lambda", v); }},
      {"alpha", [](ExperimentConfig& c, const std::string& v) { c.shadow.alpha = to_double("alpha", v); }},
      {"epochs_pretrain", [](ExperimentConfig& c, const std::string& v) { c.epochs_pretrain = to_size("epochs_pretrain", v); }},
      {"epochs_augment", [](ExperimentConfig& c, const std::string& v) { c.unlearn.augment_epochs = to_size("epochs_augment", v); }},
      {"epochs_unlearn", [](ExperimentConfig& c, const std::string& v) { c.unlearn.distill_epochs = to_size("epochs_unlearn", v); }},
      {"epochs_shadow", [](ExperimentConfig& c, const std::string& v) { c.shadow.epochs = to_size("epochs_shadow", v); }},
      {"epochs_attack", [](ExperimentConfig& c, const std::string& v) { c.classifier.epochs = to_size("epochs_attack", v); }},
      {"m_samples", [](ExperimentConfig& c, const std::string& v) { c.m_samples = to_size("m_samples", v); }},
      {"m_queries", [](ExperimentConfig& c, const std::string& v) { c.m_queries = to_size("m_queries", v); }},
      {"shared_dim", [](ExperimentConfig& c, const std::string& v) { c.dims.shared_dim = to_size("shared_dim", v); }},
      {"hidden_dim", [](ExperimentConfig& c, const std::string& v) { c.dims.hidden_dim = to_size("hidden_dim", v); }},
      {"emb_dim", [](ExperimentConfig& c, const std::string& v) { c.dims.emb_dim = to_size("emb_dim", v); }},
      {"layers", [](ExperimentConfig& c, const std::string& v) { c.dims.layers = to_size("layers", v); }},
      {"attack_hidden", [](ExperimentConfig& c, const std::string& v) { c.classifier.hidden = to_size("attack_hidden", v); }},
      {"lr_pretrain", [](ExperimentConfig& c, const std::string& v) { c.lr_pretrain = to_double("lr_pretrain", v); }},
      {"lr_augment", [](ExperimentConfig& c, const std::string& v) { c.unlearn.augment_lr = to_double("lr_augment", v); }},
      {"lr_unlearn", [](ExperimentConfig& c, const std::string& v) { c.unlearn.distill_lr = to_double("lr_unlearn", v); }},
      {"lr_shadow", [](ExperimentConfig& c, const std::string& v) { c.shadow.learning_rate = to_double("lr_shadow", v); }},
      {"lr_attack", [](ExperimentConfig& c, const std::string& v) { c.classifier.learning_rate = to_double("lr_attack", v); }},
      {"unlearn_fraction", [](ExperimentConfig& c, const std::string& v) { c.unlearn_fraction = to_double("unlearn_fraction", v); }},
      {"repetitions", [](ExperimentConfig& c, const std::string& v) { c.repetitions = to_size("repetitions", v); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
      {"workers", [](ExperimentConfig& c, const std::string& v) { c.workers = to_size("workers", v); }},
      {"attacks", [](ExperimentConfig& c, const std::string& v) { c.attacks = split_list(v); }},
      {"baseline.k_perturb", [](ExperimentConfig& c, const std::string& v) { c.baseline.k_perturb = to_size("baseline.k_perturb", v); }},
      {"baseline.edge_fraction", [](ExperimentConfig& c, const std::string& v) { c.baseline.edge_fraction = to_double("baseline.edge_fraction", v); }},
      {"baseline.reference_count", [](ExperimentConfig& c, const std::string& v) { c.baseline.reference_count = to_size("baseline.reference_count", v); }},
      {"baseline.ft_epochs", [](ExperimentConfig& c, const std::string& v) { c.baseline.ft_epochs = to_size("baseline.ft_epochs", v); }},
      {"baseline.ft_lr", [](ExperimentConfig& c, const std::string& v) { c.baseline.ft_learning_rate = to_double("baseline.ft_lr", v); }},
      {"synthetic.domains", [](ExperimentConfig& c, const std::string& v) { c.synthetic->domains = to_size("synthetic.domains", v); }},
      {"synthetic.nodes", [](ExperimentConfig& c, const std::string& v) { c.synthetic->nodes = to_size("synthetic.nodes", v); }},
      {"synthetic.shadow_nodes", [](ExperimentConfig& c, const std::string& v) { c.synthetic->shadow_nodes = to_size("synthetic.shadow_nodes", v); }},
      {"synthetic.blocks", [](ExperimentConfig& c, const std::string& v) { c.synthetic->blocks = to_size("synthetic.blocks", v); }},
      {"synthetic.avg_degree", [](ExperimentConfig& c, const std::string& v) { c.synthetic->avg_degree = to_double("synthetic.avg_degree", v); }},
      {"synthetic.homophily", [](ExperimentConfig& c, const std::string& v) { c.synthetic->homophily = to_double("synthetic.homophily", v); }},
      {"synthetic.feature_dim", [](ExperimentConfig& c, const std::string& v) { c.synthetic->feature_dim = to_size("synthetic.feature_dim", v); }},
      {"synthetic.mean_scale", [](ExperimentConfig& c, const std::string& v) { c.synthetic->mean_scale = to_double("synthetic.mean_scale", v); }},
      {"synthetic.noise", [](ExperimentConfig& c, const std::string& v) { c.synthetic->noise = to_double("synthetic.noise", v); }},
  };
  return table;
}

// dataset.<i>.{edges,features,domain} and dataset.shadow.{edges,features}
void apply_dataset_key(DatasetFixture& d, std::string_view key, const std::string& value) {
  const std::string_view rest = key.substr(std::string_view("dataset.").size());
  const std::size_t dot = rest.find('.');
  if (dot == std::string_view::npos) throw ConfigError("unknown config key '" + std::string(key) + "'");
  const std::string_view which = rest.substr(0, dot);
  const std::string_view field = rest.substr(dot + 1);
  DatasetDomain* target = nullptr;
  if (which == "shadow") {
    target = &d.shadow;
  } else {
    const std::size_t index = to_size(key, std::string(which));
    if (index > 64) throw ConfigError("config key '" + std::string(key) + "': domain index too large");
    if (d.domains.size() <= index) d.domains.resize(index + 1, DatasetDomain{.domain_id = -1});
    target = &d.domains[index];
  }
  if (field == "edges") {
    target->edges = value;
  } else if (field == "features") {
    target->features = value;
  } else if (field == "domain" && which != "shadow") {
    target->domain_id = static_cast<int>(to_u64(key, value));
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out(repetitions);
  for (std::size_t i = 0; i < repetitions; ++i) out[i] = seed + i;
  return out;
}

void ExperimentConfig::validate() const {
  objective.validate();
  unlearn.validate();
  baseline.validate();
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (dims.shared_dim < 1 || dims.hidden_dim < 1 || dims.emb_dim < 1 || dims.layers < 1) {
    throw ConfigError("encoder dims and layers must be >= 1");
  }
  if (epochs_pretrain < 1) throw ConfigError("epochs_pretrain must be >= 1");
  if (m_samples < 1) throw ConfigError("m_samples must be >= 1");
  if (!(unlearn_fraction > 0.0 && unlearn_fraction < 1.0)) throw ConfigError("unlearn_fraction must lie in (0, 1)");
  if (!(shadow.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  for (double lr : {lr_pretrain, shadow.learning_rate, classifier.learning_rate}) {
    if (!(lr >= 0.0)) throw ConfigError("learning rates must be >= 0");
  }
  if (classifier.hidden < 1) throw ConfigError("attack_hidden must be >= 1");
  if (attacks.empty()) throw ConfigError("attacks must name at least one attack");
  std::set<std::string_view> seen;
  for (const std::string& a : attacks) {
    if (!known_attack(a)) throw ConfigError("unknown attack '" + a + "'");
    if (!seen.insert(a).second) throw ConfigError("attack '" + a + "' listed twice");
  }
  if (synthetic.has_value() == dataset.has_value()) {
    throw ConfigError("exactly one of synthetic.* or dataset.* must describe the graphs");
  }
  if (synthetic) {
    if (synthetic->domains < 1) throw ConfigError("synthetic.domains must be >= 1");
    if (synthetic->nodes < 8 || synthetic->shadow_nodes < 8) throw ConfigError("synthetic graphs need >= 8 nodes");
    if (synthetic->blocks < 1 || synthetic->feature_dim < 1) throw ConfigError("synthetic.blocks and feature_dim must be >= 1");
    if (!(synthetic->homophily >= 0.0 && synthetic->homophily <= 1.0)) throw ConfigError("synthetic.homophily must lie in [0, 1]");
    if (!(synthetic->avg_degree > 0.0)) throw ConfigError("synthetic.avg_degree must be > 0");
  }
  if (dataset) {
    if (dataset->domains.empty()) throw ConfigError("dataset.* needs at least dataset.0.edges and dataset.0.features");
    auto check = [](const DatasetDomain& d, const std::string& name) {
      if (d.edges.empty() || d.features.empty()) throw ConfigError(name + " needs both edges and features");
      for (const auto& p : {d.edges, d.features}) {
        if (!std::filesystem::exists(p)) throw ConfigError(name + ": file not found: " + p.string());
      }
    };
    std::set<int> ids;
    for (std::size_t i = 0; i < dataset->domains.size(); ++i) {
      check(dataset->domains[i], "dataset." + std::to_string(i));
      const int id = dataset->domains[i].domain_id < 0 ? static_cast<int>(i) : dataset->domains[i].domain_id;
      if (!ids.insert(id).second) throw ConfigError("dataset domains reuse domain id " + std::to_string(id));
    }
    check(dataset->shadow, "dataset.shadow");
  }
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  const bool has_dataset = std::any_of(kv.begin(), kv.end(), [](const auto& e) { return e.first.starts_with("dataset."); });
  if (has_dataset) {
    c.synthetic.reset();
    c.dataset = DatasetFixture{};
  }
  for (const auto& [key, value] : kv) {
    if (key.starts_with("dataset.")) {
      apply_dataset_key(*c.dataset, key, value);
      continue;
    }
    if (key.starts_with("synthetic.") && has_dataset) {
      throw ConfigError("config mixes dataset.* and synthetic.* keys");
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value);
  }
  if (c.dataset) {
    for (std::size_t i = 0; i < c.dataset->domains.size(); ++i) {
      if (c.dataset->domains[i].domain_id < 0) c.dataset->domains[i].domain_id = static_cast<int>(i);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_key_values(read_key_values(path)); }

KeyValues config_to_key_values(const ExperimentConfig& c) {
  auto num = [](std::size_t v) { return std::to_string(v); };
  KeyValues kv = {
      {"objective", std::string(to_string(c.objective.kind))},
      {"temperature", format_double(c.objective.temperature)},
      {"ssl_negatives", num(c.objective.negatives)},
      {"edge_drop_rate", format_double(c.objective.edge_drop_rate)},
      {"feature_mask_rate", format_double(c.objective.feature_mask_rate)},
      {"lambda", format_double(c.unlearn.lambda)},
      {"alpha", format_double(c.shadow.alpha)},
      {"epochs_pretrain", num(c.epochs_pretrain)},
      {"epochs_augment", num(c.unlearn.augment_epochs)},
      {"epochs_unlearn", num(c.unlearn.distill_epochs)},
      {"epochs_shadow", num(c.shadow.epochs)},
      {"epochs_attack", num(c.classifier.epochs)},
      {"m_samples", num(c.m_samples)},
      {"m_queries", num(c.m_queries)},
      {"shared_dim", num(c.dims.shared_dim)},
      {"hidden_dim", num(c.dims.hidden_dim)},
      {"emb_dim", num(c.dims.emb_dim)},
      {"layers", num(c.dims.layers)},
      {"attack_hidden", num(c.classifier.hidden)},
      {"lr_pretrain", format_double(c.lr_pretrain)},
      {"lr_augment", format_double(c.unlearn.augment_lr)},
      {"lr_unlearn", format_double(c.unlearn.distill_lr)},
      {"lr_shadow", format_double(c.shadow.learning_rate)},
      {"lr_attack", format_double(c.classifier.learning_rate)},
      {"unlearn_fraction", format_double(c.unlearn_fraction)},
      {"repetitions", num(c.repetitions)},
      {"seed", std::to_string(c.seed)},
      {"workers", num(c.workers)},
      {"attacks", join(c.attacks)},
      {"baseline.k_perturb", num(c.baseline.k_perturb)},
      {"baseline.edge_fraction", format_double(c.baseline.edge_fraction)},
      {"baseline.reference_count", num(c.baseline.reference_count)},
      {"baseline.ft_epochs", num(c.baseline.ft_epochs)},
      {"baseline.ft_lr", format_double(c.baseline.ft_learning_rate)},
  };
  if (c.synthetic) {
    const SyntheticFixture& s = *c.synthetic;
    kv["synthetic.domains"] = num(s.domains);
    kv["synthetic.nodes"] = num(s.nodes);
    kv["synthetic.shadow_nodes"] = num(s.shadow_nodes);
    kv["synthetic.blocks"] = num(s.blocks);
    kv["synthetic.avg_degree"] = format_double(s.avg_degree);
    kv["synthetic.homophily"] = format_double(s.homophily);
    kv["synthetic.feature_dim"] = num(s.feature_dim);
    kv["synthetic.mean_scale"] = format_double(s.mean_scale);
    kv["synthetic.noise"] = format_double(s.noise);
  }
  if (c.dataset) {
    for (std::size_t i = 0; i < c.dataset->domains.size(); ++i) {
      const std::string prefix = "dataset." + std::to_string(i) + ".";
      kv[prefix + "edges"] = c.dataset->domains[i].edges.string();
      kv[prefix + "features"] = c.dataset->domains[i].features.string();
      kv[prefix + "domain"] = std::to_string(c.dataset->domains[i].domain_id);
    }
    kv["dataset.shadow.edges"] = c.dataset->shadow.edges.string();
    kv["dataset.shadow.features"] = c.dataset->shadow.features.string();
  }
  return kv;
}

std::string config_hash(const ExperimentConfig& config) {
  KeyValues kv = config_to_key_values(config);
  kv.erase("workers");  // scheduling only; results do not depend on it
  std::string text;
  for (const auto& [k, v] : kv) text += k + '=' + v + '\n';
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

}  // namespace mgpmia
