#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ate/core.hpp"
#include "ate/data.hpp"
#include "ate/multigroup.hpp"

namespace ate::harness {

enum class DesignKind { Fixed, ClipOgdZero, ClipOgdSc, Mgate };

std::string to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

struct DesignSpec {
  DesignKind kind = DesignKind::ClipOgdSc;
  double p = 0.5;                  // fixed
  double c = 1.0;                  // clip-ogd-sc, mgate
  std::string clipping = "exp-loglog";
};

/// Group family document. Explicit groups are predicates on covariate
/// fields; score-quantile groups are computed from each sequence's outcomes
/// and appended after them.
struct GroupSpec {
  std::vector<Group> groups;
  std::optional<data::ScoreGroupSpec> score_quantiles;

  bool empty() const { return groups.empty() && !score_quantiles; }
};

/// A fixed in-memory population, optionally with its own group family.
struct InMemorySource {
  std::shared_ptr<const OutcomeSequence> sequence;
};

using DataSource = std::variant<data::GaussianSpec, data::DatasetSpec, InMemorySource>;

struct ExperimentConfig {
  DataSource source = data::GaussianSpec{};
  DesignSpec design;
  GroupSpec groups;
  /// Truncates CSV / in-memory sources; Gaussian sources use GaussianSpec::T.
  std::optional<std::int64_t> horizon;
  std::int64_t reps = 500;
  std::uint64_t seed = 0;
  double alpha = 0.1;
  /// Hold outcomes fixed across replications. Defaults to false for Gaussian
  /// sources and true otherwise.
  std::optional<bool> fixed_population;
  bool regret = true;
  bool per_group = true;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::filesystem::path out_dir;

  bool population_is_fixed() const;
  void validate() const;
};

/// Final per-replication quantities, kept for downstream checks.
struct ReplicationSummary {
  double tau_hat = 0.0;
  double true_ate = 0.0;
  double vb_hat = 0.0;
  bool vb_degenerate = false;
  bool covered = false;
  double final_propensity = 0.5;
  double optimal_propensity = 0.5;  // hindsight optimum of the full sequence
  double final_regret = 0.0;
  double final_multigroup_regret = 0.0;
  std::vector<double> group_final_regret;
  std::vector<double> group_final_propensity;  // the design's current group iterate (MGATE) or p_T
  std::vector<double> group_optimal_propensity;
  std::vector<std::int64_t> group_count;
};

struct GroupCurves {
  std::string name;
  std::vector<double> mean_regret;
  std::vector<double> se_regret;
  std::vector<double> mean_count;
};

struct AggregateReport {
  std::vector<std::int64_t> t;  // logged rounds
  std::vector<double> mean_propensity;
  std::vector<double> mean_regret;
  std::vector<double> se_regret;
  std::vector<double> mean_tau_hat;  // running estimate at each logged round
  std::vector<GroupCurves> groups;
  std::vector<double> mean_multigroup_regret;

  std::int64_t horizon = 0;
  std::int64_t reps = 0;
  double tau_hat_mean = 0.0;
  double tau_hat_sd = 0.0;
  double tau_hat_se = 0.0;
  double true_ate = 0.0;
  double vb_hat_mean = 0.0;
  std::int64_t vb_degenerate_count = 0;
  double ci_coverage = 0.0;
  double final_regret_mean = 0.0;
  double final_regret_se = 0.0;
  double final_multigroup_regret_mean = 0.0;
  double runtime_seconds = 0.0;

  std::vector<ReplicationSummary> replications;
  nlohmann::json config;
};

/// Logged rounds: every round up to 1000, then geometric steps of 1%, always ending at T.
std::vector<std::int64_t> checkpoints(std::int64_t horizon);

AggregateReport run_experiment(const ExperimentConfig& cfg);

/// Fraction of replications whose Chebyshev interval contains the true ATE.
double coverage_study(const ExperimentConfig& cfg);

/// Writes `curves.csv` and `summary.json` under `dir`.
void write_report(const AggregateReport& report, const std::filesystem::path& dir);

std::string curves_csv(const AggregateReport& report);
nlohmann::json summary_json(const AggregateReport& report);

/// Parsed curve CSV (header names and columns).
struct CurveTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
};
CurveTable read_curves(const std::filesystem::path& file);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Fills `cfg` from a config document; keys absent from the document keep
/// their current values.
void apply_config_json(const nlohmann::json& doc, ExperimentConfig& cfg);

GroupSpec parse_group_spec(const nlohmann::json& doc);
nlohmann::json group_spec_to_json(const GroupSpec& spec);
GroupSpec load_group_spec(const std::filesystem::path& file);

std::string version();

}  // namespace ate::harness
