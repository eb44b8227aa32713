#include "mgpmia/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "mgpmia/errors.hpp"
#include "mgpmia/rng.hpp"

namespace mgpmia {

namespace {

ShadowSplit shadow_split(const Graph& shadow_graph, const GraphPartition& p) {
  return {.train = induced_subgraph(shadow_graph, p.shadow_train_nodes),
          .test = induced_subgraph(shadow_graph, p.shadow_test_nodes)};
}

UnlearnConfig unlearn_config(const ExperimentConfig& config) {
  UnlearnConfig u = config.unlearn;
  u.num_positive = config.m_samples;
  u.num_negative = config.m_samples;
  return u;
}

// Conventional shadow: same architecture, random init, trained only on the
// attacker's member half.
VictimModel scratch_shadow(const ExperimentConfig& config, const Scenario& s, std::uint64_t seed) {
  const Rng root(seed);
  VictimModel model = VictimModel::initialize(s.target.domains(), config.dims, config.objective,
                                              root.split("init").seed());
  model.set_fallback_domain(s.target.fallback_domain());
  fine_tune(model, s.shadow.train,
            {.epochs = config.epochs_pretrain, .learning_rate = config.lr_pretrain, .seed = root.split("train").seed()});
  return model;
}

VictimModel anchored_shadow(const ExperimentConfig& config, const Scenario& s, const VictimModel& start,
                            std::uint64_t seed) {
  const Rng root(seed);
  const FisherDiag fisher = estimate_fisher(start, s.shadow.train, root.split("fisher").seed());
  return incremental_finetune(start, s.shadow.train, fisher, config.shadow, root.split("finetune").seed()).model;
}

SplitPredictions similarity_attack(const ExperimentConfig& config, const Scenario& s,
                                   const VictimModel& shadow_model, std::uint64_t seed) {
  const Rng root(seed);
  const std::vector<NodeId> train_nodes = all_nodes(s.shadow.train);
  const std::vector<NodeId> test_nodes = all_nodes(s.shadow.test);
  const AttackDataset dataset = build_attack_dataset(shadow_model, s.shadow.train, train_nodes, s.shadow.test,
                                                     test_nodes, config.m_samples, root.split("dataset").seed());
  const AttackModel attack = train_attack_model(dataset, config.classifier, root.split("classifier").seed());
  return infer_split(attack, s.target, s.eval, config.m_samples, root.split("infer").seed());
}

const VictimModel& cached_scratch(const ExperimentConfig& config, const Scenario& s, std::uint64_t seed,
                                  AttackCache* cache, std::optional<VictimModel>& local) {
  std::optional<VictimModel>& slot = cache != nullptr ? cache->scratch_shadow : local;
  if (!slot) slot = scratch_shadow(config, s, derive_seed(seed, "scratch"));
  return *slot;
}

std::vector<NodeId> query_subset(std::size_t count, std::size_t m_queries, Rng rng) {
  std::vector<NodeId> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = static_cast<NodeId>(i);
  if (m_queries == 0 || m_queries >= count) return ids;
  rng.shuffle(std::span<NodeId>(ids));
  ids.resize(m_queries);
  std::sort(ids.begin(), ids.end());
  return ids;
}

SplitPredictions restrict_queries(const SplitPredictions& p, std::size_t m_queries, std::uint64_t seed) {
  if (m_queries == 0) return p;
  const Rng root(seed);
  SplitPredictions out{.skipped = p.skipped};
  for (NodeId i : query_subset(p.members.size(), m_queries, root.split("members"))) out.members.push_back(p.members[i]);
  for (NodeId i : query_subset(p.nonmembers.size(), m_queries, root.split("nonmembers"))) {
    out.nonmembers.push_back(p.nonmembers[i]);
  }
  return out;
}

struct SeedOutcome {
  std::vector<RunReport> reports;
  std::optional<FailureRecord> failure;
  std::optional<SeedAmplification> amplification;
};

SeedOutcome run_seed(const ExperimentConfig& config, const std::string& hash, std::uint64_t seed) {
  SeedOutcome out;
  std::string stage = "scenario";
  try {
    const Scenario scenario = build_scenario(config, seed);
    AttackCache cache;
    for (const std::string& attack : config.attacks) {
      stage = attack;
      AmplificationReport amp;
      const std::uint64_t attack_seed = derive_seed(seed, attack);
      SplitPredictions p = run_attack(config, scenario, attack, attack_seed, &cache,
                                      attack == kMgpMia ? &amp : nullptr);
      if (attack == kMgpMia) out.amplification = SeedAmplification{seed, amp};
      p = restrict_queries(p, config.m_queries, derive_seed(seed, "queries"));
      std::vector<NodeId> member_ids;
      std::vector<NodeId> nonmember_ids;
      for (const Prediction& q : p.members) member_ids.push_back(scenario.target_split.members[q.node]);
      for (const Prediction& q : p.nonmembers) nonmember_ids.push_back(scenario.target_split.nonmembers[q.node]);
      // Rows are renumbered so that key_predictions can index the id lists.
      for (std::size_t i = 0; i < p.members.size(); ++i) p.members[i].node = static_cast<NodeId>(i);
      for (std::size_t i = 0; i < p.nonmembers.size(); ++i) p.nonmembers[i].node = static_cast<NodeId>(i);
      const KeyedOutcome keyed = key_predictions(p, member_ids, nonmember_ids);
      MetricsReport m = accuracy_f1(keyed.predictions, keyed.truth);
      m.seed = seed;
      m.attack = attack_display_name(attack);
      out.reports.push_back({.metrics = m, .variant = attack_variant(attack), .config_hash = hash});
    }
  } catch (const std::exception& e) {
    out.reports.clear();
    out.amplification.reset();
    out.failure = FailureRecord{seed, stage, e.what()};
  }
  return out;
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string attack_display_name(std::string_view attack) {
  if (attack == kMgpMia || attack == kWithoutUnlearning || attack == kWithoutIncremental) return "mgp-mia";
  const BaselineKind kind = parse_baseline_kind(attack);
  if (kind == BaselineKind::kGpia) return "gpia";
  return std::string(to_string(kind)) + "-mia";
}

std::string attack_variant(std::string_view attack) {
  if (attack == kMgpMia) return "full";
  if (attack == kWithoutUnlearning || attack == kWithoutIncremental) return std::string(attack);
  parse_baseline_kind(attack);
  return "baseline";
}

Fixtures load_fixtures(const ExperimentConfig& config, std::uint64_t seed) {
  Fixtures f;
  const Rng root(seed);
  if (config.synthetic) {
    const SyntheticFixture& s = *config.synthetic;
    auto spec_for = [&](std::size_t d, std::size_t nodes, std::uint64_t instance) {
      return SbmSpec{.num_nodes = nodes, .blocks = s.blocks, .avg_degree = s.avg_degree, .homophily = s.homophily,
                     .feature_dim = s.feature_dim, .mean_scale = s.mean_scale, .noise = s.noise,
                     .domain_id = static_cast<int>(d), .family_seed = root.split("family").split(d).seed(),
                     .instance_seed = instance};
    };
    for (std::size_t d = 0; d < s.domains; ++d) {
      f.domains.push_back(generate_sbm(spec_for(d, s.nodes, root.split("instance").split(d).seed())).graph);
    }
    f.shadow_graph = generate_sbm(spec_for(0, s.shadow_nodes, root.split("shadow").seed())).graph;
  } else {
    for (const DatasetDomain& d : config.dataset->domains) {
      f.domains.push_back(load_graph(d.edges, d.features, d.domain_id));
    }
    f.shadow_graph = load_graph(config.dataset->shadow.edges, config.dataset->shadow.features,
                                config.dataset->domains.front().domain_id);
  }
  return f;
}

Scenario prepare_scenario(const ExperimentConfig& config, Fixtures fixtures, std::uint64_t seed) {
  const Rng root(seed);
  std::vector<MembershipSplit> splits;
  std::vector<NodeSet> members;
  for (std::size_t d = 0; d < fixtures.domains.size(); ++d) {
    splits.push_back(split_half(fixtures.domains[d], root.split("membership").split(d).seed()));
    members.push_back(splits.back().members);
  }
  VictimModel target = pretrain_multidomain(
      fixtures.domains, members, config.objective, config.dims,
      {.epochs = config.epochs_pretrain, .learning_rate = config.lr_pretrain, .seed = root.split("pretrain").seed()});
  const Graph& attacked = fixtures.domains.front();
  GraphPartition partition = partition_shadow(fixtures.shadow_graph, config.unlearn_fraction,
                                              root.split("partition").seed());
  EvaluationSplit eval{.member_graph = induced_subgraph(attacked, splits.front().members),
                       .nonmember_graph = induced_subgraph(attacked, splits.front().nonmembers)};
  ShadowSplit shadow = shadow_split(fixtures.shadow_graph, partition);
  Graph unlearn_graph = induced_subgraph(fixtures.shadow_graph, partition.unlearn_nodes);
  return Scenario{.fixtures = std::move(fixtures),
                  .target_split = std::move(splits.front()),
                  .partition = std::move(partition),
                  .target = std::move(target),
                  .eval = std::move(eval),
                  .shadow = std::move(shadow),
                  .unlearn_graph = std::move(unlearn_graph)};
}

Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  return prepare_scenario(config, load_fixtures(config, seed), seed);
}

SplitPredictions run_attack(const ExperimentConfig& config, const Scenario& s, std::string_view attack,
                            std::uint64_t seed, AttackCache* cache, AmplificationReport* amplification) {
  const Rng root(seed);
  // Full and wo-ul share these seeds so that they differ only in the start point.
  const std::uint64_t shadow_seed = derive_seed(seed, "shadow");
  const std::uint64_t attack_seed = derive_seed(seed, "similarity");
  if (attack == kMgpMia) {
    UnlearnResult u = unlearn(s.target, s.unlearn_graph, unlearn_config(config), root.split("unlearn").seed());
    const VictimModel shadow = anchored_shadow(config, s, u.model, shadow_seed);
    if (amplification != nullptr) {
      const VictimModel plain = anchored_shadow(config, s, s.target, shadow_seed);
      const std::uint64_t gap_seed = root.split("gap").seed();
      u.report.gap_before =
          similarity_gap(plain, s.shadow.train, s.shadow.test, config.m_samples, config.m_samples, gap_seed);
      u.report.gap_after =
          similarity_gap(shadow, s.shadow.train, s.shadow.test, config.m_samples, config.m_samples, gap_seed);
      *amplification = u.report;
    }
    return similarity_attack(config, s, shadow, attack_seed);
  }
  if (attack == kWithoutUnlearning) {
    return similarity_attack(config, s, anchored_shadow(config, s, s.target, shadow_seed), attack_seed);
  }
  std::optional<VictimModel> local;
  if (attack == kWithoutIncremental) {
    return similarity_attack(config, s, cached_scratch(config, s, seed, cache, local), attack_seed);
  }
  const BaselineKind kind = parse_baseline_kind(attack);
  BaselineSpec spec = config.baseline;
  spec.classifier = config.classifier;
  const std::uint64_t baseline_seed = root.split("baseline").seed();
  if (kind == BaselineKind::kGeMia) return ge_mia(s.target, s.eval, spec, baseline_seed);
  // The conventional shadow does not depend on which baseline asks for it.
  const VictimModel& shadow = cached_scratch(config, s, 0, cache, local);
  switch (kind) {
    case BaselineKind::kEmbedMia: return embed_mia(shadow, s.shadow, s.target, s.eval, spec, baseline_seed);
    case BaselineKind::kGradMia: return grad_mia(shadow, s.shadow, s.target, s.eval, spec, baseline_seed);
    case BaselineKind::kNloMia: return nlo_mia(shadow, s.shadow, s.target, s.eval, spec, baseline_seed);
    case BaselineKind::kGloMia: return glo_mia(shadow, s.shadow, s.target, s.eval, spec, baseline_seed);
    case BaselineKind::kGpia: return gpia(shadow, s.shadow, s.target, s.eval, spec, baseline_seed);
    case BaselineKind::kGeMia: break;
  }
  throw ConfigError("unhandled attack '" + std::string(attack) + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config_hash = config_hash(config);
  const std::vector<std::uint64_t> seeds = config.seeds();
  std::vector<SeedOutcome> outcomes(seeds.size());

  // Seeds are independent; each worker owns its outcome slots.
  std::size_t workers = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) outcomes[i] = run_seed(config, result.config_hash, seeds[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  for (SeedOutcome& o : outcomes) {
    for (RunReport& r : o.reports) result.reports.push_back(std::move(r));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
    if (o.amplification) result.amplification.push_back(std::move(*o.amplification));
  }
  result.summary = summarize_reports(result.reports);
  return result;
}

std::vector<SummaryRow> summarize_reports(const std::vector<RunReport>& reports) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> accs;
  std::vector<std::vector<double>> f1s;
  for (const RunReport& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.attack == r.metrics.attack && s.variant == r.variant;
    });
    if (it == rows.end()) {
      rows.push_back({.attack = r.metrics.attack, .variant = r.variant});
      accs.emplace_back();
      f1s.emplace_back();
      it = rows.end() - 1;
    }
    const std::size_t i = static_cast<std::size_t>(it - rows.begin());
    accs[i].push_back(r.metrics.acc);
    f1s[i].push_back(r.metrics.f1);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double n = static_cast<double>(accs[i].size());
    rows[i].runs = accs[i].size();
    double a = 0.0;
    double f = 0.0;
    for (std::size_t j = 0; j < accs[i].size(); ++j) {
      a += accs[i][j];
      f += f1s[i][j];
    }
    rows[i].acc_mean = a / n;
    rows[i].f1_mean = f / n;
    rows[i].acc_std = sample_std(accs[i], rows[i].acc_mean);
    rows[i].f1_std = sample_std(f1s[i], rows[i].f1_mean);
  }
  return rows;
}

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["acc"] = r.metrics.acc;
  j["f1"] = r.metrics.f1;
  j["tp"] = r.metrics.tp;
  j["fp"] = r.metrics.fp;
  j["tn"] = r.metrics.tn;
  j["fn"] = r.metrics.fn;
  j["n_members"] = r.metrics.n_members;
  j["n_nonmembers"] = r.metrics.n_nonmembers;
  j["seed"] = r.metrics.seed;
  j["attack"] = r.metrics.attack;
  j["variant"] = r.variant;
  j["config_hash"] = r.config_hash;
  return j.dump();
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    std::ofstream out = open("reports.jsonl");
    for (const RunReport& r : result.reports) out << report_json(r) << '\n';
  }
  {
    std::ofstream out = open("summary.csv");
    out << "attack,variant,runs,acc_mean,acc_std,f1_mean,f1_std\n";
    for (const SummaryRow& s : result.summary) {
      out << s.attack << ',' << s.variant << ',' << s.runs << ',' << format_double(s.acc_mean) << ','
          << format_double(s.acc_std) << ',' << format_double(s.f1_mean) << ',' << format_double(s.f1_std) << '\n';
    }
  }
  {
    std::ofstream out = open("failures.jsonl");
    for (const FailureRecord& f : result.failures) {
      nlohmann::ordered_json j;
      j["seed"] = f.seed;
      j["stage"] = f.stage;
      j["error"] = f.error;
      out << j.dump() << '\n';
    }
  }
  for (const SeedAmplification& a : result.amplification) {
    std::ofstream out = open("amplification_" + std::to_string(a.seed) + ".txt");
    write_amplification_report(out, a.report);
  }
}

double loglog_slope(std::span<const ScalingPoint> points) {
  if (points.size() < 2) throw RangeError("loglog_slope: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const ScalingPoint& p : points) {
    if (p.nodes == 0 || !(p.seconds > 0.0)) throw RangeError("loglog_slope: sizes and times must be positive");
    const double x = std::log(static_cast<double>(p.nodes));
    const double y = std::log(p.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw RangeError("loglog_slope: sizes must differ");
  return (n * sxy - sx * sy) / denom;
}

ScalingReport runtime_scaling_check(std::span<const std::size_t> sizes, const ExperimentConfig& config) {
  if (sizes.size() < 2) throw RangeError("runtime_scaling_check: need at least two sizes");
  for (std::size_t n : sizes) {
    if (n == 0) throw RangeError("runtime_scaling_check: zero-node graph");
  }
  ScalingReport report;
  for (std::size_t n : sizes) {
    ExperimentConfig c = config;
    SyntheticFixture fixture = config.synthetic.value_or(SyntheticFixture{});
    fixture.domains = 1;
    fixture.nodes = n;
    fixture.shadow_nodes = n;
    c.synthetic = fixture;
    c.dataset.reset();
    c.attacks = {std::string(kMgpMia)};
    c.validate();
    Fixtures fixtures = load_fixtures(c, c.seed);
    const auto start = std::chrono::steady_clock::now();
    const Scenario s = prepare_scenario(c, std::move(fixtures), c.seed);
    run_attack(c, s, kMgpMia, derive_seed(c.seed, kMgpMia));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.points.push_back({n, elapsed.count()});
  }
  report.slope = loglog_slope(report.points);
  return report;
}

}  // namespace mgpmia
