// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mgpmia/amplify.hpp"
#include "mgpmia/baselines.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/experiment.hpp"
#include "mgpmia/losses.hpp"
#include "mgpmia/metrics.hpp"
#include "mgpmia/mlp.hpp"
#include "mgpmia/shadow.hpp"
#include "mgpmia/synthetic.hpp"
#include "test_util.hpp"

namespace mgpmia {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// Criterion 1: analytic gradients vs central differences on random small instances.
Outcome gradient_integrity() {
  constexpr double kTolerance = 1e-4;
  constexpr int kTrials = 5;
  const auto start = Clock::now();
  Rng rng(2024);
  std::map<std::string, double> worst;
  auto small_dims = [&] {
    return EncoderDims{.shared_dim = 2 + rng.below(7), .hidden_dim = 2 + rng.below(7), .emb_dim = 2 + rng.below(7)};
  };
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 4 + rng.below(7);
    const std::size_t fdim = 2 + rng.below(7);
    const Graph g = testing::random_connected_graph(n, 0.3, fdim, rng);
    const std::vector<DomainSpec> domains = {{0, fdim}};

    for (ObjectiveKind kind : {ObjectiveKind::kContrastive, ObjectiveKind::kLinkPrediction}) {
      VictimModel m = VictimModel::initialize(domains, small_dims(), SslObjective{.kind = kind, .negatives = 2},
                                              rng.next_u64());
      const std::uint64_t seed = rng.next_u64();
      ParamSet grads = m.params().zeros_like();
      task_loss(m, g, seed, &grads);
      const double e = testing::max_fd_error(m.params(), grads, [&] { return task_loss(m, g, seed, nullptr); });
      const std::string name = kind == ObjectiveKind::kContrastive ? "contrastive" : "link-prediction";
      worst[name] = std::max(worst[name], e);
    }

    {
      Mlp mlp = Mlp::init(fdim, 2 + rng.below(7), 2, rng);
      const DenseMatrix x = testing::random_matrix(n, fdim, rng);
      std::vector<int> labels(n);
      for (int& y : labels) y = static_cast<int>(rng.below(2));
      MlpCache cache;
      DenseMatrix grad_logits(n, 2);
      cross_entropy(mlp.forward(x, &cache), labels, &grad_logits);
      ParamSet grads = mlp.params().zeros_like();
      mlp.backward(cache, grad_logits, grads);
      const double e = testing::max_fd_error(mlp.params(), grads,
                                             [&] { return cross_entropy(mlp.forward(x), labels, nullptr); });
      worst["cross-entropy"] = std::max(worst["cross-entropy"], e);
    }

    {
      const ObjectiveKind kind = trial % 2 == 0 ? ObjectiveKind::kContrastive : ObjectiveKind::kLinkPrediction;
      VictimModel m = VictimModel::initialize(domains, small_dims(), SslObjective{.kind = kind}, rng.next_u64());
      const SampleSet samples = sample_nodes(g, all_nodes(g), m.objective(), 2, 2, rng.next_u64());
      const ProfileViews views(g, m.objective(), samples.view_seeds);
      std::vector<SimilarityVector> teacher;
      for (const NodeSamples& s : samples.nodes) {
        teacher.push_back({.node = s.node,
                           .positive = {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                           .negative = {rng.uniform(-1, 1), rng.uniform(-1, 1)}});
      }
      ParamSet grads = m.params().zeros_like();
      distillation_loss(m, views, samples, teacher, &grads);
      const double e = testing::max_fd_error(
          m.params(), grads, [&] { return distillation_loss(m, views, samples, teacher, nullptr); });
      worst["distillation"] = std::max(worst["distillation"], e);
    }

    {
      VictimModel m = VictimModel::initialize(domains, small_dims(), SslObjective{}, rng.next_u64());
      std::vector<double> anchor = m.params().flatten();
      FisherDiag fisher;
      for (double& a : anchor) {
        a += rng.uniform(-0.5, 0.5);
        fisher.values.push_back(rng.uniform(0.0, 2.0));
      }
      const double alpha = rng.uniform(0.01, 2.0);
      ParamSet grads = m.params().zeros_like();
      ewc_penalty(m.params(), anchor, fisher, alpha, &grads);
      const double e = testing::max_fd_error(m.params(), grads,
                                             [&] { return ewc_penalty(m.params(), anchor, fisher, alpha, nullptr); });
      worst["ewc"] = std::max(worst["ewc"], e);
    }
  }
  const double elapsed = seconds_since(start);
  bool pass = elapsed < 60.0;
  std::string detail;
  for (const auto& [name, e] : worst) {
    pass = pass && e < kTolerance;
    detail += fmt("%s %.2e, ", name.c_str(), e);
  }
  detail += fmt("max rel err < %.0e required, %.1fs (< 60s)", kTolerance, elapsed);
  return {pass, detail};
}

// Criterion 2: algebraic fixed points.
Outcome fixed_points() {
  const Graph g = generate_sbm({.num_nodes = 60, .feature_dim = 8, .family_seed = 1, .instance_seed = 2}).graph;
  VictimModel target = VictimModel::initialize(std::vector<DomainSpec>{{0, 8}},
                                               EncoderDims{.shared_dim = 16, .hidden_dim = 16, .emb_dim = 16},
                                               SslObjective{}, 3);
  fine_tune(target, g, {.epochs = 20, .learning_rate = 1e-2, .seed = 4});

  const UnlearnResult zero = unlearn(target, g, UnlearnConfig{.lambda = 0.0}, 5);
  const std::vector<double> a = zero.model.params().flatten();
  const std::vector<double> b = target.params().flatten();
  double drift = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) drift = std::max(drift, std::abs(a[i] - b[i]));

  const UnlearnResult one = unlearn(target, g, UnlearnConfig{.lambda = 1.0, .distill_epochs = 1}, 6);
  bool teacher_exact = !one.augment_scores.empty();
  for (std::size_t i = 0; i < one.augment_scores.size(); ++i) {
    teacher_exact = teacher_exact &&
                    teacher_scores(one.target_scores[i], one.augment_scores[i], 1.0) == one.augment_scores[i];
  }

  const FisherDiag fisher = estimate_fisher(target, g, 7);
  const ShadowResult shadow = incremental_finetune(target, g, fisher, {.alpha = 0.0, .epochs = 20}, 8);
  VictimModel plain = target;
  fine_tune(plain, g, {.epochs = 20, .learning_rate = 1e-3, .seed = 8});
  const bool alpha_zero = shadow.model.params() == plain.params();

  const bool augment_zero =
      fine_tune_augment(target, g, UnlearnConfig{.augment_epochs = 0}, 9).params() == target.params();

  const bool pass = drift < 1e-9 && teacher_exact && alpha_zero && augment_zero;
  return {pass, fmt("lambda=0 drift %.1e (< 1e-9), lambda=1 teacher==augment %s, alpha=0 bit-identical %s, "
                    "E1a=0 augment==target %s",
                    drift, teacher_exact ? "yes" : "no", alpha_zero ? "yes" : "no", augment_zero ? "yes" : "no")};
}

// The overfit link-prediction fixture shared by criteria 3-5.
ExperimentConfig fixture_config() {
  return config_from_key_values({{"objective", "link_prediction"},
                                 {"lr_pretrain", "0.01"},
                                 {"epochs_pretrain", "500"},
                                 {"repetitions", "5"},
                                 {"seed", "0"},
                                 {"attacks", "mgp-mia,wo-ul,wo-il,embed"},
                                 {"synthetic.domains", "2"},
                                 {"synthetic.nodes", "300"}});
}

struct FixtureRun {
  ExperimentResult result;
  double seconds = 0.0;
};

struct Stats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> values;
};

Stats accuracy_of(const ExperimentResult& r, const std::string& attack, const std::string& variant) {
  Stats s;
  for (const RunReport& rep : r.reports) {
    if (rep.metrics.attack == attack && rep.variant == variant) s.values.push_back(rep.metrics.acc);
  }
  if (s.values.empty()) return s;
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(s.values.size());
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.values.size() - 1));
  }
  return s;
}

// Criterion 3: unlearning widens the member/non-member similarity gap on shadow nodes.
Outcome amplification(const FixtureRun& run) {
  int increased = 0;
  std::string per_seed;
  for (const SeedAmplification& a : run.result.amplification) {
    const double delta = a.report.gap_after - a.report.gap_before;
    increased += delta > 0.0 ? 1 : 0;
    per_seed += fmt("%+.4f ", delta);
  }
  const bool complete = run.result.amplification.size() == 5 && run.result.failures.empty();
  const bool pass = complete && increased >= 4 && run.seconds < 300.0;
  return {pass, fmt("gap increased in %d/5 seeds (>= 4 required), deltas [ %s], fixture run %.1fs (< 300s)",
                    increased, per_seed.c_str(), run.seconds)};
}

// Criterion 4: MGP-MIA accuracy on the overfit victim.
Outcome effectiveness(const FixtureRun& run) {
  const Stats mgp = accuracy_of(run.result, "mgp-mia", "full");
  const Stats embed = accuracy_of(run.result, "embed-mia", "baseline");
  const bool pass = mgp.values.size() == 5 && embed.values.size() == 5 && mgp.mean >= 0.60 &&
                    mgp.mean > embed.mean && run.seconds < 900.0;
  return {pass, fmt("MGP-MIA acc %.3f +- %.3f (>= 0.60), Embed-MIA acc %.3f +- %.3f (must be lower), %.1fs (< 900s)",
                    mgp.mean, mgp.std, embed.mean, embed.std, run.seconds)};
}

// Criterion 5: the full pipeline is not beaten by either ablation beyond one std.
Outcome ablation(const FixtureRun& run) {
  const Stats full = accuracy_of(run.result, "mgp-mia", "full");
  bool pass = full.values.size() == 5;
  std::string detail = fmt("full %.3f +- %.3f", full.mean, full.std);
  for (const char* variant : {"wo-ul", "wo-il"}) {
    const Stats v = accuracy_of(run.result, "mgp-mia", variant);
    const double tolerance = std::max(full.std, v.std);
    const bool ok = v.values.size() == 5 && full.mean >= v.mean - tolerance;
    const char* how = full.mean >= v.mean ? "ahead" : (ok ? "tie within 1 std" : "behind");
    detail += fmt(", %s %.3f +- %.3f (%s)", variant, v.mean, v.std, how);
    pass = pass && ok;
  }
  return {pass, detail};
}

// Criterion 6: metrics against an exhaustive confusion-matrix oracle.
Outcome metric_oracle() {
  std::size_t mismatches = 0;
  for (int p = 0; p < 256; ++p) {
    for (int t = 0; t < 256; ++t) {
      LabelMap pred;
      LabelMap truth;
      std::size_t tp = 0;
      std::size_t fp = 0;
      std::size_t tn = 0;
      std::size_t fn = 0;
      for (int i = 0; i < 8; ++i) {
        const int a = (p >> i) & 1;
        const int b = (t >> i) & 1;
        pred[static_cast<NodeId>(i)] = a;
        truth[static_cast<NodeId>(i)] = b;
        if (a == 1 && b == 1) ++tp;
        if (a == 1 && b == 0) ++fp;
        if (a == 0 && b == 0) ++tn;
        if (a == 0 && b == 1) ++fn;
      }
      double f1 = 0.0;
      if (tp + fp > 0 && tp + fn > 0) {
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (precision + recall > 0.0) f1 = 2.0 * precision * recall / (precision + recall);
      }
      const MetricsReport r = accuracy_f1(pred, truth);
      const bool same = r.tp == tp && r.fp == fp && r.tn == tn && r.fn == fn &&
                        r.acc == static_cast<double>(tp + tn) / 8.0 && r.f1 == f1;
      mismatches += same ? 0 : 1;
    }
  }
  return {mismatches == 0, fmt("%zu mismatches over 65536 (prediction, truth) labelings of 8 nodes", mismatches)};
}

// Criterion 7: baseline feature shapes.
Outcome baseline_shapes() {
  const Graph g = generate_sbm({.num_nodes = 80, .feature_dim = 8, .family_seed = 1, .instance_seed = 2}).graph;
  const VictimModel m = VictimModel::initialize(std::vector<DomainSpec>{{0, 8}},
                                                EncoderDims{.shared_dim = 8, .hidden_dim = 8, .emb_dim = 8},
                                                SslObjective{}, 3);
  const BaselineSpec spec;
  const std::size_t nlo = perturbation_features(m, perturbation_set(g, spec.k_perturb, spec.edge_fraction, 4)).cols();
  const EvaluationSplit eval{.member_graph = g, .nonmember_graph = g};
  GeReferences refs;
  ge_mia(m, eval, spec, 5, &refs);
  NodeObjective objective(g, m.objective(), m.dims().layers, 6);
  const ParameterChange change = node_parameter_change(m, objective, 0, spec.ft_epochs, spec.ft_learning_rate);
  const bool pass = nlo == 45 && refs.members.size() == 20 && refs.nonmembers.size() == 20 &&
                    change.epochs_run == 10 && change.norms.size() == m.params().count();
  return {pass, fmt("NLO-MIA features %zu (45), GE-MIA references %zu+%zu (20+20), GPIA epochs %zu (10)", nlo,
                    refs.members.size(), refs.nonmembers.size(), change.epochs_run)};
}

// Criterion 8: pipeline wall time grows linearly with graph size.
Outcome scaling() {
  ExperimentConfig c = config_from_key_values({{"epochs_pretrain", "20"},
                                               {"epochs_shadow", "10"},
                                               {"epochs_unlearn", "10"},
                                               {"epochs_attack", "50"},
                                               {"shared_dim", "16"},
                                               {"hidden_dim", "16"},
                                               {"emb_dim", "16"}});
  const std::vector<std::size_t> sizes = {500, 1000, 2000, 4000};
  const ScalingReport r = runtime_scaling_check(sizes, c);
  std::string times;
  for (const ScalingPoint& p : r.points) times += fmt("%zu:%.2fs ", p.nodes, p.seconds);
  const bool pass = r.slope >= 0.8 && r.slope <= 1.4;
  return {pass, fmt("log-log slope %.3f (in [0.8, 1.4]), %s", r.slope, times.c_str())};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Criterion 9: identical (config, seed) gives byte-identical reports.
Outcome determinism() {
  const ExperimentConfig c = config_from_key_values({{"epochs_pretrain", "30"},
                                                     {"epochs_shadow", "10"},
                                                     {"epochs_unlearn", "10"},
                                                     {"epochs_attack", "50"},
                                                     {"shared_dim", "16"},
                                                     {"hidden_dim", "16"},
                                                     {"emb_dim", "16"},
                                                     {"baseline.ft_epochs", "3"},
                                                     {"synthetic.nodes", "100"},
                                                     {"synthetic.shadow_nodes", "100"},
                                                     {"repetitions", "2"}});
  const auto root = std::filesystem::temp_directory_path() / "mgpmia_acceptance_determinism";
  std::filesystem::remove_all(root);
  write_experiment(root / "a", run_experiment(c));
  write_experiment(root / "b", run_experiment(c));
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    if (!std::filesystem::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
  }
  const std::string reports = read_file(root / "a" / "reports.jsonl");
  const std::size_t lines = static_cast<std::size_t>(std::count(reports.begin(), reports.end(), '\n'));
  std::filesystem::remove_all(root);
  const bool pass = differing == 0 && lines == 2 * c.attacks.size();
  return {pass, fmt("%zu of %zu output files differ, %zu report lines (%zu expected)", differing, files, lines,
                    2 * c.attacks.size())};
}

}  // namespace
}  // namespace mgpmia

int main() {
  using namespace mgpmia;
  bool all = true;
  auto report = [&](int id, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, gradient_integrity);
  report(2, fixed_points);
  FixtureRun run;
  std::string fixture_error;
  try {
    const auto start = Clock::now();
    run.result = run_experiment(fixture_config());
    run.seconds = seconds_since(start);
    if (!run.result.failures.empty()) fixture_error = run.result.failures.front().error;
  } catch (const std::exception& e) {
    fixture_error = e.what();
  }
  auto with_fixture = [&](Outcome (*check)(const FixtureRun&)) {
    return [&, check] {
      if (!fixture_error.empty()) return Outcome{false, "fixture run failed: " + fixture_error};
      return check(run);
    };
  };
  report(3, with_fixture(amplification));
  report(4, with_fixture(effectiveness));
  report(5, with_fixture(ablation));
  report(6, metric_oracle);
  report(7, baseline_shapes);
  report(8, scaling);
  report(9, determinism);
  return all ? 0 : 1;
}
