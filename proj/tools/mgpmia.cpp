// Command-line front end for the audit pipeline.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgpmia/diagnostics.hpp"
#include "mgpmia/errors.hpp"
#include "mgpmia/experiment.hpp"
#include "mgpmia/rng.hpp"

namespace {

using namespace mgpmia;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Flat key = value config file");
  cmd->add_option("--seed", o.seed, "Base seed (overrides the config)");
  cmd->add_option("--repetitions", o.repetitions, "Number of seeds (overrides the config)");
  cmd->add_option("--out", o.out_dir, "Output directory");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.repetitions) c.repetitions = *o.repetitions;
  c.validate();
  return c;
}

void print_summary(const ExperimentResult& r) {
  std::printf("%-10s %-9s %4s %8s %8s %8s %8s\n", "attack", "variant", "runs", "acc", "acc_sd", "f1", "f1_sd");
  for (const SummaryRow& s : r.summary) {
    std::printf("%-10s %-9s %4zu %8.4f %8.4f %8.4f %8.4f\n", s.attack.c_str(), s.variant.c_str(), s.runs,
                s.acc_mean, s.acc_std, s.f1_mean, s.f1_std);
  }
  for (const SeedAmplification& a : r.amplification) {
    std::printf("seed %llu: similarity gap %.6f -> %.6f after unlearning\n",
                static_cast<unsigned long long>(a.seed), a.report.gap_before, a.report.gap_after);
  }
  for (const FailureRecord& f : r.failures) {
    std::fprintf(stderr, "seed %llu failed in %s: %s\n", static_cast<unsigned long long>(f.seed), f.stage.c_str(),
                 f.error.c_str());
  }
}

int run_and_write(ExperimentConfig c, std::vector<std::string> attacks, const std::string& out_dir) {
  if (!attacks.empty()) c.attacks = std::move(attacks);
  const ExperimentResult r = run_experiment(c);
  write_experiment(out_dir, r);
  print_summary(r);
  std::printf("reports written to %s (config %s)\n", out_dir.c_str(), r.config_hash.c_str());
  return r.failures.empty() ? 0 : 3;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

int pretrain_cmd(const CommonOptions& o) {
  const ExperimentConfig c = resolve(o);
  const Scenario s = build_scenario(c, c.seed);
  const std::filesystem::path dir = o.out_dir;
  std::filesystem::create_directories(dir);
  save_victim(s.target, dir / "victim.ckpt");
  std::ofstream out = open_out(dir / "membership.csv");
  out << "node,member\n";
  for (NodeId v : s.target_split.members) out << v << ",1\n";
  for (NodeId v : s.target_split.nonmembers) out << v << ",0\n";
  std::printf("victim (%s, %zu epochs) written to %s\n", std::string(to_string(c.objective.kind)).c_str(),
              s.target.trained_epochs, (dir / "victim.ckpt").c_str());
  return 0;
}

int diagnose_cmd(const CommonOptions& o, const std::string& kind, std::size_t trials, double budget) {
  const ExperimentConfig c = resolve(o);
  const Scenario s = build_scenario(c, c.seed);
  const Graph& g = s.fixtures.domains.front();
  std::vector<NodeId> nodes;
  std::vector<int> labels;
  for (NodeId v : s.target_split.members) {
    nodes.push_back(v);
    labels.push_back(1);
  }
  for (NodeId v : s.target_split.nonmembers) {
    nodes.push_back(v);
    labels.push_back(0);
  }
  const std::filesystem::path dir = o.out_dir;
  if (kind == "pca") {
    const DenseMatrix emb = embed(s.target, g);
    DenseMatrix rows(nodes.size(), emb.cols());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::copy(emb.row(nodes[i]).begin(), emb.row(nodes[i]).end(), rows.row(i).begin());
    }
    const PcaResult pca = pca_project(rows, 2);
    std::ofstream out = open_out(dir / "pca.csv");
    write_pca_csv(out, pca, nodes, labels);
    std::printf("explained variance %.4f %.4f%s\n", pca.explained_variance_ratio[0], pca.explained_variance_ratio[1],
                pca.rank_deficient ? " (rank deficient)" : "");
    return 0;
  }
  const std::vector<double> sim = robustness_probe(s.target, g, nodes, budget, trials, derive_seed(c.seed, "robustness"));
  std::ofstream out = open_out(dir / "robustness.csv");
  write_robustness_csv(out, nodes, labels, sim);
  std::vector<double> member_sim;
  std::vector<double> nonmember_sim;
  for (std::size_t i = 0; i < nodes.size(); ++i) (labels[i] ? member_sim : nonmember_sim).push_back(sim[i]);
  for (const auto& [name, values] : {std::pair{"members", &member_sim}, std::pair{"nonmembers", &nonmember_sim}}) {
    const DistributionSummary d = summarize(*values);
    std::printf("%-10s n=%zu mean=%.4f sd=%.4f min=%.4f median=%.4f max=%.4f\n", name, d.count, d.mean, d.stddev,
                d.min, d.median, d.max);
  }
  return 0;
}

int scaling_cmd(const CommonOptions& o, const std::vector<std::size_t>& sizes) {
  const ExperimentConfig c = resolve(o);
  const ScalingReport r = runtime_scaling_check(sizes, c);
  std::ofstream out = open_out(std::filesystem::path(o.out_dir) / "scaling.csv");
  out << "nodes,seconds\n";
  for (const ScalingPoint& p : r.points) {
    out << p.nodes << ',' << format_double(p.seconds) << '\n';
    std::printf("n=%-6zu %.3f s\n", p.nodes, p.seconds);
  }
  std::printf("log-log slope %.3f\n", r.slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference audit of multi-domain graph pre-trained encoders"};
  app.require_subcommand(1);
  CommonOptions common;

  CLI::App* pretrain = app.add_subcommand("pretrain", "Pre-train the victim and save it with its membership split");
  add_common(pretrain, common);

  CLI::App* attack = app.add_subcommand("attack", "Run the full attack pipeline");
  add_common(attack, common);

  std::string baseline_name;
  CLI::App* baseline = app.add_subcommand("baseline", "Run one baseline attack");
  add_common(baseline, common);
  baseline->add_option("--name", baseline_name, "embed, grad, nlo, glo, ge or gpia")->required();

  std::string variant;
  CLI::App* ablate = app.add_subcommand("ablate", "Run an ablated pipeline");
  add_common(ablate, common);
  ablate->add_option("--variant", variant, "wo-ul or wo-il")->required()->check(CLI::IsMember({"wo-ul", "wo-il"}));

  std::string diag_kind;
  std::size_t trials = 5;
  double budget = kRobustnessBudget;
  CLI::App* diagnose = app.add_subcommand("diagnose", "Pre-attack diagnostics (CSV exports)");
  add_common(diagnose, common);
  diagnose->add_option("kind", diag_kind, "pca or robustness")->required()->check(CLI::IsMember({"pca", "robustness"}));
  diagnose->add_option("--trials", trials, "Perturbation trials for robustness");
  diagnose->add_option("--budget", budget, "Edge perturbation budget for robustness");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Run every attack listed in the config");
  add_common(evaluate, common);

  std::vector<std::size_t> sizes = {500, 1000, 2000, 4000};
  CLI::App* scaling = app.add_subcommand("scaling", "Time the pipeline over graph sizes");
  add_common(scaling, common);
  scaling->add_option("--sizes", sizes, "Node counts")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (pretrain->parsed()) return pretrain_cmd(common);
    if (attack->parsed()) return run_and_write(resolve(common), {"mgp-mia"}, common.out_dir);
    if (baseline->parsed()) {
      return run_and_write(resolve(common), {std::string(to_string(parse_baseline_kind(baseline_name)))},
                           common.out_dir);
    }
    if (ablate->parsed()) return run_and_write(resolve(common), {variant}, common.out_dir);
    if (diagnose->parsed()) return diagnose_cmd(common, diag_kind, trials, budget);
    if (evaluate->parsed()) return run_and_write(resolve(common), {}, common.out_dir);
    if (scaling->parsed()) return scaling_cmd(common, sizes);
  } catch (const mgpmia::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
