#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ate/harness.hpp"
#include "test_support.hpp"

namespace ate::harness {
namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) { return (fs::path(ATE_FIXTURE_DIR) / name).string(); }

ExperimentConfig constant_population(std::size_t n, double y1, double y0) {
  ExperimentConfig cfg;
  cfg.source = InMemorySource{std::make_shared<const OutcomeSequence>(
      std::vector<PotentialOutcomePair>(n, PotentialOutcomePair{y1, y0}))};
  return cfg;
}

ExperimentConfig small_gaussian(DesignKind kind, std::int64_t T, std::int64_t reps) {
  ExperimentConfig cfg;
  data::GaussianSpec g;
  g.T = T;
  cfg.source = g;
  cfg.design.kind = kind;
  cfg.reps = reps;
  cfg.seed = 42;
  cfg.threads = 1;
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ate_harness_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Checkpoints, DenseThenGeometric) {
  EXPECT_EQ(checkpoints(3), (std::vector<std::int64_t>{1, 2, 3}));
  const auto marks = checkpoints(20000);
  EXPECT_EQ(marks.front(), 1);
  EXPECT_EQ(marks[999], 1000);
  EXPECT_EQ(marks.back(), 20000);
  for (std::size_t k = 1; k < marks.size(); ++k) EXPECT_GT(marks[k], marks[k - 1]);
  EXPECT_LT(marks.size(), 1400u);
  EXPECT_TRUE(checkpoints(0).empty());
}

TEST(RunExperiment, SmallRunIsBitReproducible) {
  ExperimentConfig cfg = constant_population(2, 2, 1);
  cfg.design.kind = DesignKind::Fixed;
  cfg.reps = 1;
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  EXPECT_EQ(curves_csv(a), curves_csv(b));
  EXPECT_EQ(a.tau_hat_mean, b.tau_hat_mean);
}

TEST(RunExperiment, FixedOptimumHasZeroRegret) {
  ExperimentConfig cfg = constant_population(20, 2, 1);
  cfg.design.kind = DesignKind::Fixed;
  cfg.design.p = 2.0 / 3.0;
  cfg.reps = 1000;
  const auto r = run_experiment(cfg);
  EXPECT_NEAR(r.final_regret_mean, 0.0, 1e-9);
  for (double v : r.mean_regret) EXPECT_NEAR(v, 0.0, 1e-9);
  EXPECT_EQ(r.true_ate, 1.0);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 300, 150);
  cfg.threads = 1;
  const auto serial = run_experiment(cfg);
  cfg.threads = 4;
  const auto parallel = run_experiment(cfg);
  EXPECT_EQ(curves_csv(serial), curves_csv(parallel));
  EXPECT_EQ(serial.tau_hat_mean, parallel.tau_hat_mean);
}

TEST(RunExperiment, ReplicationResultsIndependentOfReplicationCount) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 200, 7);
  const auto few = run_experiment(cfg);
  cfg.reps = 130;
  const auto many = run_experiment(cfg);
  for (std::size_t r = 0; r < few.replications.size(); ++r) {
    EXPECT_EQ(few.replications[r].tau_hat, many.replications[r].tau_hat);
    EXPECT_EQ(few.replications[r].final_regret, many.replications[r].final_regret);
    EXPECT_EQ(few.replications[r].final_propensity, many.replications[r].final_propensity);
  }
}

TEST(RunExperiment, StreamingAggregationMatchesTwoPass) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 500, 300);
  const auto rep = run_experiment(cfg);
  auto two_pass = [&](auto field) {
    double mean = 0.0;
    for (const auto& s : rep.replications) mean += field(s);
    mean /= static_cast<double>(rep.replications.size());
    double ss = 0.0;
    for (const auto& s : rep.replications) ss += (field(s) - mean) * (field(s) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rep.replications.size() - 1));
    return std::pair{mean, sd};
  };
  const auto [reg_mean, reg_sd] = two_pass([](const ReplicationSummary& s) { return s.final_regret; });
  const auto [tau_mean, tau_sd] = two_pass([](const ReplicationSummary& s) { return s.tau_hat; });
  const double n = static_cast<double>(rep.replications.size());
  EXPECT_LE(testing::rel_err(rep.final_regret_mean, reg_mean), 1e-9);
  EXPECT_LE(testing::rel_err(rep.final_regret_se, reg_sd / std::sqrt(n)), 1e-9);
  EXPECT_LE(testing::rel_err(rep.mean_regret.back(), reg_mean), 1e-9);
  EXPECT_LE(testing::rel_err(rep.se_regret.back(), reg_sd / std::sqrt(n)), 1e-9);
  EXPECT_LE(testing::rel_err(rep.tau_hat_mean, tau_mean), 1e-9);
  EXPECT_LE(testing::rel_err(rep.tau_hat_sd, tau_sd), 1e-9);
  for (double se : rep.se_regret) EXPECT_GE(se, 0.0);
}

TEST(RunExperiment, FixedPopulationSharesOutcomesAcrossReplications) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 100, 20);
  cfg.fixed_population = true;
  const auto fixed = run_experiment(cfg);
  for (const auto& s : fixed.replications) EXPECT_EQ(s.true_ate, fixed.replications[0].true_ate);
  cfg.fixed_population = false;
  const auto redrawn = run_experiment(cfg);
  EXPECT_NE(redrawn.replications[0].true_ate, redrawn.replications[1].true_ate);
}

TEST(RunExperiment, MgateNeedsGroups) {
  ExperimentConfig cfg = small_gaussian(DesignKind::Mgate, 100, 2);
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(RunExperiment, MgateWithScoreGroupsReportsPerGroupCurves) {
  ExperimentConfig cfg = small_gaussian(DesignKind::Mgate, 400, 5);
  cfg.groups.score_quantiles = data::ScoreGroupSpec{};
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.groups.size(), 3u);
  EXPECT_EQ(r.groups[0].name, "G0");
  EXPECT_EQ(r.groups[0].mean_count.back(), 400.0);
  ASSERT_EQ(r.mean_multigroup_regret.size(), r.t.size());
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    for (const auto& g : r.groups) EXPECT_LE(g.mean_regret[k], r.mean_multigroup_regret[k] + 1e-9);
  }
}

TEST(RunExperiment, CsvSourceUsesOwnGroupColumns) {
  ExperimentConfig cfg;
  data::DatasetSpec d;
  d.path = fixture("small.csv");
  d.resample = 5;
  cfg.source = d;
  cfg.design.kind = DesignKind::Mgate;
  cfg.reps = 3;
  const auto r = run_experiment(cfg);
  EXPECT_EQ(r.horizon, 15);
  ASSERT_EQ(r.groups.size(), 1u);
  EXPECT_EQ(r.groups[0].name, "a");
  EXPECT_EQ(r.groups[0].mean_count.back(), 10.0);
}

TEST(CoverageStudy, AlphaOneReportsFraction) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 200, 50);
  cfg.alpha = 1.0;
  const double cov = coverage_study(cfg);
  EXPECT_GE(cov, 0.0);
  EXPECT_LE(cov, 1.0);
}

TEST(WriteReport, CurvesRoundTrip) {
  ExperimentConfig cfg = small_gaussian(DesignKind::Mgate, 1500, 4);
  cfg.groups.groups = {{"all", GroupPredicate::all()}};
  cfg.groups.score_quantiles = data::ScoreGroupSpec{};
  const auto r = run_experiment(cfg);
  const fs::path dir = scratch_dir("roundtrip");
  write_report(r, dir);
  const CurveTable table = read_curves(dir / "curves.csv");
  EXPECT_EQ(table.header,
            (std::vector<std::string>{"t", "mean_propensity", "mean_regret", "se_regret", "mean_regret_all",
                                      "se_regret_all", "mean_regret_G0", "se_regret_G0", "mean_regret_G1",
                                      "se_regret_G1", "mean_regret_G2", "se_regret_G2"}));
  ASSERT_EQ(table.column("t").size(), r.t.size());
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    EXPECT_EQ(table.column("t")[k], static_cast<double>(r.t[k]));
    EXPECT_EQ(table.column("mean_propensity")[k], r.mean_propensity[k]);
    EXPECT_EQ(table.column("mean_regret")[k], r.mean_regret[k]);
    EXPECT_EQ(table.column("se_regret")[k], r.se_regret[k]);
    EXPECT_EQ(table.column("mean_regret_G2")[k], r.groups[3].mean_regret[k]);
  }
  // Idempotent.
  std::stringstream first;
  first << std::ifstream(dir / "curves.csv").rdbuf();
  write_report(r, dir);
  std::stringstream second;
  second << std::ifstream(dir / "curves.csv").rdbuf();
  EXPECT_EQ(first.str(), second.str());
  fs::remove_all(dir);
}

TEST(WriteReport, SummarySchema) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 100, 10);
  const auto r = run_experiment(cfg);
  const nlohmann::json j = summary_json(r);
  for (const char* key : {"config", "tau_hat_mean", "tau_hat_sd", "true_ate", "vb_hat_mean", "ci_coverage",
                          "final_regret_mean", "per_group", "runtime_seconds", "version", "metadata"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["config"]["design"]["type"], "clip-ogd-sc");
  EXPECT_FALSE(j["version"].get<std::string>().empty());
  EXPECT_TRUE(j["metadata"].contains("timestamp"));
}

TEST(WriteReport, RegretDisabledWritesNan) {
  ExperimentConfig cfg = small_gaussian(DesignKind::ClipOgdSc, 5, 3);
  cfg.regret = false;
  const std::string csv = curves_csv(run_experiment(cfg));
  EXPECT_NE(csv.find(",nan,nan\n"), std::string::npos);
}

TEST(ConfigJson, AppliesAndRoundTrips) {
  const auto doc = nlohmann::json::parse(R"({
    "source": {"type": "gaussian", "mu1": 3, "mu0": 0.5, "sigma": 0.2, "horizon": 777},
    "design": {"type": "mgate", "c": 0.5, "clipping": "log"},
    "groups": {"groups": [{"name": "lo", "type": "interval", "field": "x", "lo": 0, "hi": 0.5},
                          {"name": "flag", "type": "column", "column": "g_flag"},
                          {"name": "everyone", "type": "all"}],
               "score_quantiles": {"epsilon": 0.001, "thresholds": [[0, 0.5], [0.5, 1]], "include_all": false}},
    "reps": 12, "seed": 9, "alpha": 0.05, "fixed_population": true, "regret": false, "out": "somewhere"
  })");
  ExperimentConfig cfg;
  apply_config_json(doc, cfg);
  const auto& g = std::get<data::GaussianSpec>(cfg.source);
  EXPECT_EQ(g.mu1, 3.0);
  EXPECT_EQ(g.T, 777);
  EXPECT_EQ(cfg.design.kind, DesignKind::Mgate);
  EXPECT_EQ(cfg.design.c, 0.5);
  EXPECT_EQ(cfg.design.clipping, "log");
  ASSERT_EQ(cfg.groups.groups.size(), 3u);
  EXPECT_EQ(cfg.groups.groups[0].predicate.kind, GroupPredicate::Kind::Interval);
  EXPECT_EQ(cfg.groups.groups[1].predicate.field, "g_flag");
  ASSERT_TRUE(cfg.groups.score_quantiles);
  EXPECT_EQ(cfg.groups.score_quantiles->thresholds.size(), 2u);
  EXPECT_FALSE(cfg.groups.score_quantiles->include_all_group);
  EXPECT_EQ(cfg.reps, 12);
  EXPECT_EQ(cfg.alpha, 0.05);
  EXPECT_TRUE(cfg.population_is_fixed());
  EXPECT_FALSE(cfg.regret);
  EXPECT_EQ(cfg.out_dir, fs::path("somewhere"));

  ExperimentConfig again;
  apply_config_json(config_to_json(cfg), again);
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
}

TEST(ConfigJson, CsvSourceAndErrors) {
  ExperimentConfig cfg;
  apply_config_json(nlohmann::json::parse(
                        R"({"source": {"type": "csv", "path": "x.csv", "resample": 5, "imputation_scale": 0.3}})"),
                    cfg);
  const auto& d = std::get<data::DatasetSpec>(cfg.source);
  EXPECT_EQ(d.resample, 5);
  EXPECT_EQ(*d.imputation_scale, 0.3);
  EXPECT_TRUE(cfg.population_is_fixed());

  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"source": {"type": "parquet"}})"), cfg), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"design": {"type": "thompson"}})"), cfg), ConfigError);
  EXPECT_THROW(apply_config_json(nlohmann::json::parse(R"({"reps": "many"})"), cfg), ConfigError);
  EXPECT_THROW(parse_group_spec(nlohmann::json::parse(R"({"groups": []})")), ConfigError);
  EXPECT_THROW(parse_group_spec(nlohmann::json::parse(R"({"groups": [{"name": "a", "type": "odd"}]})")),
               ConfigError);
}

TEST(ConfigJson, ValidationRejectsBadValues) {
  ExperimentConfig cfg;
  cfg.reps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.reps = 1;
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.alpha = 0.1;
  cfg.design.kind = DesignKind::Fixed;
  cfg.design.p = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(design_kind_from_string("nope"), ConfigError);
  EXPECT_EQ(design_kind_from_string(to_string(DesignKind::ClipOgdZero)), DesignKind::ClipOgdZero);
}

TEST(GroupSpecJson, LoadsFromFile) {
  const fs::path dir = scratch_dir("groups");
  fs::create_directories(dir);
  const GroupSpec spec{{{"lo", GroupPredicate::interval("x", 0.0, 0.55)}}, std::nullopt};
  std::ofstream(dir / "groups.json") << group_spec_to_json(spec).dump();
  const GroupSpec back = load_group_spec(dir / "groups.json");
  ASSERT_EQ(back.groups.size(), 1u);
  EXPECT_EQ(back.groups[0].predicate.hi, 0.55);
  EXPECT_THROW(load_group_spec(dir / "missing.json"), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace ate::harness
