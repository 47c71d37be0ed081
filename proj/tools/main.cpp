// Command-line harness: simulate | run-dataset | coverage | report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ate/harness.hpp"

namespace {

using ate::harness::ExperimentConfig;

struct SharedFlags {
  std::string config;
  std::string design;
  double p = 0.5;
  double c = 1.0;
  std::string clipping;
  std::int64_t horizon = 0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double alpha = 0.1;
  std::string groups;
  bool fixed_population = false;
  std::string out;
  unsigned threads = 0;

  CLI::Option* design_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* c_opt = nullptr;
  CLI::Option* clipping_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* reps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* groups_opt = nullptr;
  CLI::Option* fixed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment configuration; flags override its values")
        ->check(CLI::ExistingFile);
    design_opt = app->add_option("--design", design, "Design")
                     ->check(CLI::IsMember({"fixed", "clip-ogd-0", "clip-ogd-sc", "mgate"}));
    p_opt = app->add_option("--p", p, "Propensity for the fixed design");
    c_opt = app->add_option("--c", c, "Strong-convexity constant (eta_t = 1/(2 c^2 t))");
    clipping_opt = app->add_option("--clipping", clipping, "Clipping function")
                       ->check(CLI::IsMember({"exp-loglog", "log"}));
    horizon_opt = app->add_option("--horizon", horizon, "Rounds per replication");
    reps_opt = app->add_option("--reps", reps, "Monte Carlo replications");
    seed_opt = app->add_option("--seed", seed, "Master seed");
    alpha_opt = app->add_option("--alpha", alpha, "Chebyshev interval level, in (0, 1]");
    groups_opt = app->add_option("--groups", groups, "Group specification file (JSON)")->check(CLI::ExistingFile);
    fixed_opt = app->add_option("--fixed-population", fixed_population,
                                "Hold outcomes fixed across replications (true/false)");
    out_opt = app->add_option("--out", out, "Output directory for curves.csv and summary.json");
    threads_opt = app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  void apply(ExperimentConfig& cfg) const {
    if (design_opt->count()) cfg.design.kind = ate::harness::design_kind_from_string(design);
    if (p_opt->count()) cfg.design.p = p;
    if (c_opt->count()) cfg.design.c = c;
    if (clipping_opt->count()) cfg.design.clipping = clipping;
    if (reps_opt->count()) cfg.reps = reps;
    if (seed_opt->count()) cfg.seed = seed;
    if (alpha_opt->count()) cfg.alpha = alpha;
    if (groups_opt->count()) cfg.groups = ate::harness::load_group_spec(groups);
    if (fixed_opt->count()) cfg.fixed_population = fixed_population;
    if (out_opt->count()) cfg.out_dir = out;
    if (threads_opt->count()) cfg.threads = threads;
  }
};

void load_config(const std::string& path, ExperimentConfig& cfg) {
  if (path.empty()) return;
  std::ifstream in(path);
  try {
    ate::harness::apply_config_json(nlohmann::json::parse(in), cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ate::ConfigError("cannot parse " + path + ": " + e.what());
  }
}

void print_summary(const ate::harness::AggregateReport& r, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof(line), "T=%lld  reps=%lld  runtime=%.2fs\n", static_cast<long long>(r.horizon),
                static_cast<long long>(r.reps), r.runtime_seconds);
  os << line;
  std::snprintf(line, sizeof(line), "tau_hat mean=%.6g sd=%.6g  true ATE=%.6g\n", r.tau_hat_mean, r.tau_hat_sd,
                r.true_ate);
  os << line;
  std::snprintf(line, sizeof(line), "VB_hat mean=%.6g  CI coverage=%.4f\n", r.vb_hat_mean, r.ci_coverage);
  os << line;
  std::snprintf(line, sizeof(line), "final Neyman regret mean=%.6g (se %.3g)  mean p_T=%.4f\n",
                r.final_regret_mean, r.final_regret_se, r.mean_propensity.empty() ? 0.0 : r.mean_propensity.back());
  os << line;
  for (const auto& g : r.groups) {
    std::snprintf(line, sizeof(line), "  group %-12s regret=%.6g (se %.3g)  n=%.0f\n", g.name.c_str(),
                  g.mean_regret.back(), g.se_regret.back(), g.mean_count.back());
    os << line;
  }
}

int finish(const ExperimentConfig& cfg, const ate::harness::AggregateReport& report) {
  print_summary(report, std::cout);
  if (!cfg.out_dir.empty()) {
    ate::harness::write_report(report, cfg.out_dir);
    std::cout << "wrote " << (cfg.out_dir / "curves.csv").string() << " and "
              << (cfg.out_dir / "summary.json").string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive experimental designs for average-treatment-effect estimation"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run on Gaussian potential outcomes");
  SharedFlags sim_flags;
  sim_flags.attach(simulate);
  ate::data::GaussianSpec gauss;
  auto* mu1_opt = simulate->add_option("--mu1", gauss.mu1, "Treated mean");
  auto* mu0_opt = simulate->add_option("--mu0", gauss.mu0, "Control mean");
  auto* sigma_opt = simulate->add_option("--sigma", gauss.sigma, "Outcome standard deviation");

  // run-dataset
  auto* run_dataset = app.add_subcommand("run-dataset", "Monte Carlo run on a CSV outcome table");
  SharedFlags ds_flags;
  ds_flags.attach(run_dataset);
  ate::data::DatasetSpec dataset;
  auto* data_opt = run_dataset->add_option("--data", dataset.path, "Outcome CSV")->check(CLI::ExistingFile);
  auto* y1_opt = run_dataset->add_option("--y1-col", dataset.treated_column, "Treated outcome column");
  auto* y0_opt = run_dataset->add_option("--y0-col", dataset.control_column, "Control outcome column");
  auto* resample_opt = run_dataset->add_option("--resample", dataset.resample, "Copies of each row");
  double imputation_scale = 0.0;
  auto* imp_opt = run_dataset->add_option("--imputation-scale", imputation_scale, "Imputation noise SD");
  bool no_shuffle = false;
  run_dataset->add_flag("--no-shuffle", no_shuffle, "Keep file row order");

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Empirical coverage of the Chebyshev interval");
  SharedFlags cov_flags;
  cov_flags.attach(coverage);
  ate::data::GaussianSpec cov_gauss;
  auto* cov_mu1 = coverage->add_option("--mu1", cov_gauss.mu1, "Treated mean");
  auto* cov_mu0 = coverage->add_option("--mu0", cov_gauss.mu0, "Control mean");
  auto* cov_sigma = coverage->add_option("--sigma", cov_gauss.sigma, "Outcome standard deviation");
  std::string cov_data;
  coverage->add_option("--data", cov_data, "Use a CSV outcome table instead of Gaussian outcomes")
      ->check(CLI::ExistingFile);

  // report
  auto* report_cmd = app.add_subcommand("report", "Print a saved report");
  std::string report_dir;
  report_cmd->add_option("--in,dir", report_dir, "Directory holding curves.csv and summary.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed() || (coverage->parsed() && cov_data.empty())) {
      const bool is_cov = coverage->parsed();
      const SharedFlags& flags = is_cov ? cov_flags : sim_flags;
      ExperimentConfig cfg;
      load_config(flags.config, cfg);
      auto g = std::holds_alternative<ate::data::GaussianSpec>(cfg.source)
                   ? std::get<ate::data::GaussianSpec>(cfg.source)
                   : ate::data::GaussianSpec{};
      const auto& src = is_cov ? cov_gauss : gauss;
      if ((is_cov ? cov_mu1 : mu1_opt)->count()) g.mu1 = src.mu1;
      if ((is_cov ? cov_mu0 : mu0_opt)->count()) g.mu0 = src.mu0;
      if ((is_cov ? cov_sigma : sigma_opt)->count()) g.sigma = src.sigma;
      if (flags.horizon_opt->count()) g.T = flags.horizon;
      flags.apply(cfg);
      if (!flags.seed_opt->count() && flags.config.empty()) g.seed = cfg.seed;
      if (flags.seed_opt->count()) g.seed = cfg.seed;
      cfg.source = g;
      if (is_cov) {
        cfg.regret = false;
        cfg.per_group = false;
        const auto report = ate::harness::run_experiment(cfg);
        std::cout << "coverage=" << report.ci_coverage << " (alpha=" << cfg.alpha << ", reps=" << cfg.reps
                  << ")\n";
        return finish(cfg, report);
      }
      return finish(cfg, ate::harness::run_experiment(cfg));
    }

    if (run_dataset->parsed() || coverage->parsed()) {
      const bool is_cov = coverage->parsed();
      const SharedFlags& flags = is_cov ? cov_flags : ds_flags;
      ExperimentConfig cfg;
      load_config(flags.config, cfg);
      auto d = std::holds_alternative<ate::data::DatasetSpec>(cfg.source)
                   ? std::get<ate::data::DatasetSpec>(cfg.source)
                   : ate::data::DatasetSpec{};
      if (is_cov) {
        d.path = cov_data;
      } else {
        if (data_opt->count()) d.path = dataset.path;
        if (y1_opt->count()) d.treated_column = dataset.treated_column;
        if (y0_opt->count()) d.control_column = dataset.control_column;
        if (resample_opt->count()) d.resample = dataset.resample;
        if (imp_opt->count()) d.imputation_scale = imputation_scale;
        if (no_shuffle) d.shuffle = false;
      }
      if (d.path.empty()) throw ate::ConfigError("run-dataset needs --data or a csv source in --config");
      flags.apply(cfg);
      if (flags.seed_opt->count() || flags.config.empty()) d.seed = cfg.seed;
      if (flags.horizon_opt->count()) cfg.horizon = flags.horizon;
      cfg.source = d;
      if (is_cov) {
        cfg.regret = false;
        cfg.per_group = false;
        const auto report = ate::harness::run_experiment(cfg);
        std::cout << "coverage=" << report.ci_coverage << " (alpha=" << cfg.alpha << ", reps=" << cfg.reps
                  << ")\n";
        return finish(cfg, report);
      }
      return finish(cfg, ate::harness::run_experiment(cfg));
    }

    if (report_cmd->parsed()) {
      const std::filesystem::path dir(report_dir);
      std::ifstream in(dir / "summary.json");
      if (!in) throw ate::ConfigError("no summary.json in " + dir.string());
      const auto summary = nlohmann::json::parse(in);
      const auto curves = ate::harness::read_curves(dir / "curves.csv");
      std::cout << "version " << summary.value("version", std::string("?")) << ", design "
                << summary["config"]["design"].value("type", std::string("?")) << '\n';
      for (const char* key : {"tau_hat_mean", "tau_hat_sd", "true_ate", "vb_hat_mean", "ci_coverage",
                              "final_regret_mean"}) {
        std::cout << "  " << key << " = " << summary[key].dump() << '\n';
      }
      const auto& t = curves.column("t");
      const auto& regret = curves.column("mean_regret");
      const auto& prop = curves.column("mean_propensity");
      std::cout << "      t   mean_propensity   mean_regret\n";
      for (std::size_t k = 0; k < t.size(); ++k) {
        const auto tt = static_cast<long long>(t[k]);
        const bool decade = tt == 1 || tt == 10 || tt == 100 || tt == 1000 || k + 1 == t.size() || (tt > 1000 && k % 50 == 0);
        if (!decade) continue;
        char line[128];
        std::snprintf(line, sizeof(line), "%7lld   %15.6f   %11.6g\n", tt, prop[k], regret[k]);
        std::cout << line;
      }
      for (auto it = summary["per_group"].begin(); it != summary["per_group"].end(); ++it) {
        std::cout << "  group " << it.key() << ": " << it.value().dump() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
