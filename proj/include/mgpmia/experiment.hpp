#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgpmia/amplify.hpp"
#include "mgpmia/attack.hpp"
#include "mgpmia/baselines.hpp"
#include "mgpmia/kv.hpp"
#include "mgpmia/metrics.hpp"
#include "mgpmia/shadow.hpp"
#include "mgpmia/synthetic.hpp"
#include "mgpmia/victim.hpp"

namespace mgpmia {

struct SyntheticFixture {
  std::size_t domains = 2;
  std::size_t nodes = 300;         // per target-side domain graph
  std::size_t shadow_nodes = 300;  // attacker's graph from the target domain
  std::size_t blocks = 2;
  double avg_degree = 8.0;
  double homophily = 0.8;
  std::size_t feature_dim = 16;
  double mean_scale = 1.0;
  double noise = 1.0;
};

struct DatasetDomain {
  std::filesystem::path edges{};
  std::filesystem::path features{};
  int domain_id = 0;
};

struct DatasetFixture {
  std::vector<DatasetDomain> domains;  // the first one is attacked
  DatasetDomain shadow;
};

// Attack names accepted in `attacks`.
inline constexpr std::string_view kMgpMia = "mgp-mia";
inline constexpr std::string_view kWithoutUnlearning = "wo-ul";
inline constexpr std::string_view kWithoutIncremental = "wo-il";

struct ExperimentConfig {
  SslObjective objective;
  EncoderDims dims;
  std::size_t epochs_pretrain = 500;
  double lr_pretrain = 1e-3;
  UnlearnConfig unlearn;
  ShadowConfig shadow;
  ClassifierConfig classifier;
  BaselineSpec baseline;
  std::size_t m_samples = 5;
  std::size_t m_queries = 0;  // query nodes per side; 0 queries every node
  double unlearn_fraction = 0.2;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0 uses the hardware concurrency
  std::vector<std::string> attacks = {"mgp-mia", "wo-ul", "wo-il", "embed", "grad", "nlo", "glo", "ge", "gpia"};
  std::optional<SyntheticFixture> synthetic = SyntheticFixture{};
  std::optional<DatasetFixture> dataset;

  // Seeds seed, seed+1, ... one per repetition.
  std::vector<std::uint64_t> seeds() const;
  void validate() const;
};

ExperimentConfig config_from_key_values(const KeyValues& kv);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical text form: every resolved field, sorted by key.
KeyValues config_to_key_values(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

struct RunReport {
  MetricsReport metrics;
  std::string variant;
  std::string config_hash;
};

struct FailureRecord {
  std::uint64_t seed = 0;
  std::string stage;
  std::string error;
};

struct SummaryRow {
  std::string attack;
  std::string variant;
  std::size_t runs = 0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
};

struct SeedAmplification {
  std::uint64_t seed = 0;
  AmplificationReport report;
};

struct ExperimentResult {
  std::string config_hash;
  std::vector<RunReport> reports;  // ordered by seed, then by `attacks`
  std::vector<FailureRecord> failures;
  std::vector<SeedAmplification> amplification;  // seeds that ran mgp-mia
  std::vector<SummaryRow> summary;
};

struct Fixtures {
  std::vector<Graph> domains;  // domains[0] is attacked
  Graph shadow_graph;          // attacker's graph from the same domain
};

Fixtures load_fixtures(const ExperimentConfig& config, std::uint64_t seed);

// Everything one seed's pipeline shares across attacks.
struct Scenario {
  Fixtures fixtures;
  MembershipSplit target_split;  // ids in fixtures.domains[0]
  GraphPartition partition;      // ids in fixtures.shadow_graph
  VictimModel target;
  EvaluationSplit eval;
  ShadowSplit shadow;
  Graph unlearn_graph;
};

// Splits every domain in half, pre-trains the victim on the member halves
// and partitions the shadow graph.
Scenario prepare_scenario(const ExperimentConfig& config, Fixtures fixtures, std::uint64_t seed);
Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed);

// Shadow models that several attacks of one seed reuse.
struct AttackCache {
  std::optional<VictimModel> scratch_shadow;
};

// Predictions of one named attack on the scenario's evaluation split.
// `amplification` is filled for mgp-mia, which then also trains the wo-ul
// shadow to measure the similarity gap before and after unlearning.
SplitPredictions run_attack(const ExperimentConfig& config, const Scenario& scenario,
                            std::string_view attack, std::uint64_t seed, AttackCache* cache = nullptr,
                            AmplificationReport* amplification = nullptr);

// "mgp-mia" for the three pipeline variants, "<kind>-mia" or "gpia" otherwise.
std::string attack_display_name(std::string_view attack);
std::string attack_variant(std::string_view attack);

ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<SummaryRow> summarize_reports(const std::vector<RunReport>& reports);

std::string report_json(const RunReport& report);
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result);

struct ScalingPoint {
  std::size_t nodes = 0;
  double seconds = 0.0;
};
struct ScalingReport {
  std::vector<ScalingPoint> points;
  double slope = 0.0;  // least-squares slope of log(seconds) on log(nodes)
};

// Times the single-domain attack pipeline on synthetic graphs of each size
// with all other knobs fixed. Graph generation is excluded from timing.
ScalingReport runtime_scaling_check(std::span<const std::size_t> sizes, const ExperimentConfig& config);
double loglog_slope(std::span<const ScalingPoint> points);

}  // namespace mgpmia
