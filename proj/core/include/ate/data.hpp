#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ate/core.hpp"
#include "ate/multigroup.hpp"
#include "ate/rng.hpp"

namespace ate::data {

/// y_t(i) iid N(mu_i, sigma^2), i in {0,1}.
struct GaussianSpec {
  double mu1 = 2.0;
  double mu0 = 1.0;
  double sigma = 1.0;
  std::int64_t T = 1000;
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  std::string path;
  std::string treated_column = "y1";
  std::string control_column = "y0";
  /// Group indicator columns. Empty means every column whose name starts with "g_".
  std::vector<std::string> group_columns;
  /// Standard deviation of the imputation noise; defaults to each column's sample SD.
  std::optional<double> imputation_scale;
  int resample = 1;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

struct ScoreGroupSpec {
  double epsilon = 1e-9;
  std::vector<std::pair<double, double>> thresholds = {{0.0, 2.0 / 3.0}, {1.0 / 3.0, 1.0}};
  bool include_all_group = true;
};

/// A CSV-backed sequence. Group columns are carried as 0/1 covariate fields
/// and exposed as an indicator-based family.
struct Dataset {
  OutcomeSequence sequence;
  GroupFamily groups;  // empty when the file names no group columns
  MembershipMatrix membership;
};

struct ScoreGroups {
  std::vector<double> scores;
  std::vector<double> ranks;  // mid-distribution ranks in (0, 1)
  MembershipMatrix membership;
  GroupFamily family;         // indicator predicates on fields "g_<name>"
};

OutcomeSequence gen_gaussian(const GaussianSpec& spec);

/// Parses, imputes missing cells ("" or "NA") with N(column mean, scale^2),
/// replicates each row `resample` times, then optionally shuffles.
/// All randomness comes from `spec.seed`.
Dataset ingest_csv(const DatasetSpec& spec);

/// s_t = 1 / (1 + y0^2 / (y1^2 + eps)).
double neyman_score(double y1, double y0, double epsilon);

/// Groups by mid-distribution rank r_t = (#{s < s_t} + #{s = s_t}/2) / n of
/// the per-unit score; unit joins (lo, hi) iff lo <= r_t <= hi.
ScoreGroups score_quantile_groups(const OutcomeSequence& seq, const ScoreGroupSpec& spec);

/// Adds one "g_<name>" indicator column per group so the family's predicates
/// resolve against the sequence's covariates.
void attach_groups(OutcomeSequence& seq, const ScoreGroups& groups);

}  // namespace ate::data
