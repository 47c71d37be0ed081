#include "ate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ate/designs.hpp"
#include "ate/estimation.hpp"
#include "ate/regret.hpp"
#include "ate/rng.hpp"

#ifndef ATE_VERSION
#define ATE_VERSION "0.0.0-unknown"
#endif

namespace ate::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Streaming mean/variance (Welford).
class Moments {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::int64_t count() const { return n_; }
  double mean() const { return n_ > 0 ? mean_ : kNaN; }
  double sd() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }
  double se() const { return n_ > 0 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0; }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Population {
  OutcomeSequence sequence;
  GroupFamily family;
  MembershipMatrix membership;

  bool has_groups() const { return family.size() > 0; }
};

struct ReplicationResult {
  std::vector<double> propensity;  // at checkpoints
  std::vector<double> regret;
  std::vector<double> tau_hat;
  std::vector<std::vector<double>> group_regret;  // [group][checkpoint]
  std::vector<std::vector<double>> group_count;
  std::vector<double> multigroup;
  ReplicationSummary summary;
};

Population build_population(const ExperimentConfig& cfg, std::uint64_t seed) {
  Population pop;
  GroupFamily source_family;
  if (const auto* g = std::get_if<data::GaussianSpec>(&cfg.source)) {
    data::GaussianSpec spec = *g;
    spec.seed = seed;
    pop.sequence = data::gen_gaussian(spec);
  } else if (const auto* d = std::get_if<data::DatasetSpec>(&cfg.source)) {
    data::DatasetSpec spec = *d;
    spec.seed = seed;
    data::Dataset ds = data::ingest_csv(spec);
    pop.sequence = std::move(ds.sequence);
    source_family = std::move(ds.groups);
  } else {
    const auto& mem = std::get<InMemorySource>(cfg.source);
    if (!mem.sequence) throw ConfigError("in-memory source has no sequence");
    pop.sequence = *mem.sequence;
  }
  if (cfg.horizon && !std::holds_alternative<data::GaussianSpec>(cfg.source)) {
    if (*cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
    pop.sequence = pop.sequence.prefix(static_cast<std::size_t>(*cfg.horizon));
  }
  if (pop.sequence.empty()) throw ConfigError("data source produced no units");

  std::vector<Group> groups = cfg.groups.groups;
  if (cfg.groups.score_quantiles) {
    const data::ScoreGroups sg = data::score_quantile_groups(pop.sequence, *cfg.groups.score_quantiles);
    data::attach_groups(pop.sequence, sg);
    for (const auto& g : sg.family.groups()) groups.push_back(g);
  }
  if (!groups.empty()) {
    pop.family = GroupFamily(std::move(groups));
  } else if (source_family.size() > 0) {
    pop.family = std::move(source_family);
  }
  if (pop.has_groups()) pop.membership = pop.family.membership(pop.sequence);
  return pop;
}

std::unique_ptr<AdaptiveDesign> build_design(const DesignSpec& spec, const Population& pop) {
  const auto T = static_cast<std::int64_t>(pop.sequence.size());
  switch (spec.kind) {
    case DesignKind::Fixed:
      return fixed_design(spec.p);
    case DesignKind::ClipOgdZero:
      return clip_ogd_zero(T);
    case DesignKind::ClipOgdSc:
      return clip_ogd_sc(spec.c, ClippingFunction::by_name(spec.clipping));
    case DesignKind::Mgate:
      if (!pop.has_groups()) throw ConfigError("the mgate design requires a group family");
      return mgate_design(pop.family, spec.c, ClippingFunction::by_name(spec.clipping));
  }
  throw ConfigError("unknown design");
}

double optimum_or_nan(std::span<const PotentialOutcomePair> units) {
  try {
    return evaluation::optimal_propensity(units).p;
  } catch (const DomainError&) {
    return kNaN;
  }
}

ReplicationResult run_replication(const ExperimentConfig& cfg, const Population& pop,
                                  const std::vector<std::int64_t>& marks, std::uint64_t rep_seed) {
  const OutcomeSequence& seq = pop.sequence;
  auto design = build_design(cfg.design, pop);
  Rng coins(derive_seed(rep_seed, 2));
  const Trajectory traj = run_design(*design, seq, coins);

  ReplicationResult out;
  const std::size_t m = marks.size();
  out.propensity.resize(m);
  out.tau_hat.resize(m);
  {
    double ipw_sum = 0.0;
    std::size_t k = 0;
    for (std::size_t t = 0; t < traj.size() && k < m; ++t) {
      const auto& r = traj[t];
      ipw_sum += r.z == 1 ? r.y_obs / r.p : -r.y_obs / (1.0 - r.p);
      if (static_cast<std::int64_t>(t + 1) == marks[k]) {
        out.propensity[k] = r.p;
        out.tau_hat[k] = ipw_sum / static_cast<double>(t + 1);
        ++k;
      }
    }
  }

  auto& s = out.summary;
  const AteEstimate est = ipw_estimate(traj);
  const VarianceBoundEstimate vb = variance_bound_estimate(traj);
  s.tau_hat = est.tau_hat;
  s.true_ate = true_ate(seq);
  s.vb_hat = vb.vb_hat;
  s.vb_degenerate = vb.degenerate;
  s.covered = chebyshev_ci(est, vb, cfg.alpha).contains(s.true_ate);
  s.final_propensity = traj[traj.size() - 1].p;
  s.optimal_propensity = optimum_or_nan(seq.units());

  if (cfg.regret) {
    const evaluation::RegretCurve curve = evaluation::neyman_regret(traj, seq);
    out.regret.resize(m);
    for (std::size_t k = 0; k < m; ++k) out.regret[k] = curve.values[static_cast<std::size_t>(marks[k] - 1)];
    s.final_regret = curve.final();
  }

  if (cfg.per_group && pop.has_groups()) {
    const std::size_t d = pop.family.size();
    const evaluation::GroupRegret gr = evaluation::group_regret(traj, seq, pop.membership);
    out.group_regret.assign(d, std::vector<double>(m));
    out.group_count.assign(d, std::vector<double>(m));
    out.multigroup.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const auto idx = static_cast<std::size_t>(marks[k] - 1);
      for (std::size_t g = 0; g < d; ++g) {
        out.group_regret[g][k] = gr.groups[g].values[idx];
        out.group_count[g][k] = static_cast<double>(gr.groups[g].counts[idx]);
      }
      out.multigroup[k] = gr.multigroup[idx];
    }
    s.final_multigroup_regret = gr.multigroup.back();
    const auto* mg = dynamic_cast<const Mgate*>(design.get());
    std::vector<std::vector<PotentialOutcomePair>> members(d);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (std::size_t g = 0; g < d; ++g) {
        if (pop.membership.at(t, g)) members[g].push_back(seq[t]);
      }
    }
    for (std::size_t g = 0; g < d; ++g) {
      s.group_final_regret.push_back(gr.groups[g].values.back());
      s.group_final_propensity.push_back(mg != nullptr ? mg->state().group_propensity[g] : s.final_propensity);
      s.group_optimal_propensity.push_back(members[g].empty() ? kNaN : optimum_or_nan(members[g]));
      s.group_count.push_back(gr.groups[g].counts.back());
    }
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

const nlohmann::json* find(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

}  // namespace

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::Fixed: return "fixed";
    case DesignKind::ClipOgdZero: return "clip-ogd-0";
    case DesignKind::ClipOgdSc: return "clip-ogd-sc";
    case DesignKind::Mgate: return "mgate";
  }
  return "unknown";
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "fixed") return DesignKind::Fixed;
  if (name == "clip-ogd-0") return DesignKind::ClipOgdZero;
  if (name == "clip-ogd-sc") return DesignKind::ClipOgdSc;
  if (name == "mgate") return DesignKind::Mgate;
  throw ConfigError("unknown design '" + name + "'");
}

bool ExperimentConfig::population_is_fixed() const {
  return fixed_population.value_or(!std::holds_alternative<data::GaussianSpec>(source));
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw ConfigError("replications must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (design.kind == DesignKind::Fixed && !(design.p > 0.0 && design.p < 1.0)) {
    throw ConfigError("fixed design needs 0 < p < 1");
  }
  if ((design.kind == DesignKind::ClipOgdSc || design.kind == DesignKind::Mgate) && !(design.c > 0.0)) {
    throw ConfigError("c must be positive");
  }
  ClippingFunction::by_name(design.clipping);
  if (const auto* g = std::get_if<data::GaussianSpec>(&source)) {
    if (!(g->sigma > 0.0)) throw ConfigError("Gaussian sigma must be positive");
    if (g->T < 1) throw ConfigError("Gaussian horizon must be at least 1");
    if (design.kind == DesignKind::ClipOgdZero && g->T < 2) throw ConfigError("clip-ogd-0 needs a horizon of at least 2");
  }
  if (design.kind == DesignKind::Mgate && groups.empty()) {
    const auto* d = std::get_if<data::DatasetSpec>(&source);
    // A CSV with g_ columns supplies its own groups; checked again once loaded.
    if (d == nullptr) throw ConfigError("the mgate design requires a group specification");
  }
}

std::vector<std::int64_t> checkpoints(std::int64_t horizon) {
  std::vector<std::int64_t> out;
  if (horizon < 1) return out;
  const std::int64_t dense = std::min<std::int64_t>(horizon, 1000);
  for (std::int64_t t = 1; t <= dense; ++t) out.push_back(t);
  std::int64_t t = dense;
  while (t < horizon) {
    const auto grown = static_cast<std::int64_t>(std::ceil(static_cast<double>(t) * 1.01));
    t = std::min(horizon, std::max(t + 1, grown));
    out.push_back(t);
  }
  return out;
}

AggregateReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::optional<Population> fixed;
  if (cfg.population_is_fixed()) {
    std::uint64_t pop_seed = derive_seed(cfg.seed, std::numeric_limits<std::uint64_t>::max());
    if (const auto* g = std::get_if<data::GaussianSpec>(&cfg.source)) pop_seed = g->seed;
    if (const auto* d = std::get_if<data::DatasetSpec>(&cfg.source)) pop_seed = d->seed;
    fixed = build_population(cfg, pop_seed);
  }

  // Horizon and group names are fixed by the first population.
  Population first = fixed ? *fixed : build_population(cfg, derive_seed(derive_seed(cfg.seed, 0), 1));
  const auto T = static_cast<std::int64_t>(first.sequence.size());
  const std::vector<std::int64_t> marks = checkpoints(T);
  const std::size_t m = marks.size();
  const std::vector<std::string> group_names =
      cfg.per_group && first.has_groups() ? first.family.names() : std::vector<std::string>{};
  const std::size_t d = group_names.size();

  std::vector<Moments> prop(m), reg(m), tau(m), multi(m);
  std::vector<std::vector<Moments>> greg(d, std::vector<Moments>(m)), gcount(d, std::vector<Moments>(m));

  AggregateReport report;
  report.replications.reserve(static_cast<std::size_t>(cfg.reps));
  const unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  const std::size_t batch = std::max<std::size_t>(64, static_cast<std::size_t>(threads) * 16);
  const auto reps = static_cast<std::size_t>(cfg.reps);

  for (std::size_t begin = 0; begin < reps; begin += batch) {
    const std::size_t end = std::min(reps, begin + batch);
    std::vector<ReplicationResult> results(end - begin);
    parallel_for(end - begin, threads, [&](std::size_t i) {
      const std::uint64_t rep_seed = derive_seed(cfg.seed, begin + i);
      if (fixed) {
        results[i] = run_replication(cfg, *fixed, marks, rep_seed);
      } else {
        const Population pop =
            begin + i == 0 ? first : build_population(cfg, derive_seed(rep_seed, 1));
        if (static_cast<std::int64_t>(pop.sequence.size()) != T) {
          throw ConfigError("replications produced sequences of different lengths");
        }
        results[i] = run_replication(cfg, pop, marks, rep_seed);
      }
    });
    // Ordered merge keeps aggregation independent of scheduling.
    for (auto& r : results) {
      for (std::size_t k = 0; k < m; ++k) {
        prop[k].add(r.propensity[k]);
        tau[k].add(r.tau_hat[k]);
        if (cfg.regret) reg[k].add(r.regret[k]);
        if (d > 0) {
          multi[k].add(r.multigroup[k]);
          for (std::size_t g = 0; g < d; ++g) {
            greg[g][k].add(r.group_regret[g][k]);
            gcount[g][k].add(r.group_count[g][k]);
          }
        }
      }
      report.replications.push_back(std::move(r.summary));
    }
  }

  report.horizon = T;
  report.reps = cfg.reps;
  report.t = marks;
  for (std::size_t k = 0; k < m; ++k) {
    report.mean_propensity.push_back(prop[k].mean());
    report.mean_tau_hat.push_back(tau[k].mean());
    report.mean_regret.push_back(cfg.regret ? reg[k].mean() : kNaN);
    report.se_regret.push_back(cfg.regret ? reg[k].se() : kNaN);
    if (d > 0) report.mean_multigroup_regret.push_back(multi[k].mean());
  }
  for (std::size_t g = 0; g < d; ++g) {
    GroupCurves gc;
    gc.name = group_names[g];
    for (std::size_t k = 0; k < m; ++k) {
      gc.mean_regret.push_back(greg[g][k].mean());
      gc.se_regret.push_back(greg[g][k].se());
      gc.mean_count.push_back(gcount[g][k].mean());
    }
    report.groups.push_back(std::move(gc));
  }

  Moments tau_hat, truth, vb, fin, fin_mg;
  std::int64_t covered = 0;
  for (const auto& s : report.replications) {
    tau_hat.add(s.tau_hat);
    truth.add(s.true_ate);
    vb.add(s.vb_hat);
    fin.add(s.final_regret);
    fin_mg.add(s.final_multigroup_regret);
    covered += s.covered ? 1 : 0;
    report.vb_degenerate_count += s.vb_degenerate ? 1 : 0;
  }
  report.tau_hat_mean = tau_hat.mean();
  report.tau_hat_sd = tau_hat.sd();
  report.tau_hat_se = tau_hat.se();
  report.true_ate = truth.mean();
  report.vb_hat_mean = vb.mean();
  report.ci_coverage = static_cast<double>(covered) / static_cast<double>(cfg.reps);
  report.final_regret_mean = cfg.regret ? fin.mean() : kNaN;
  report.final_regret_se = cfg.regret ? fin.se() : kNaN;
  report.final_multigroup_regret_mean = d > 0 ? fin_mg.mean() : kNaN;
  report.config = config_to_json(cfg);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double coverage_study(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.regret = false;
  c.per_group = false;
  return run_experiment(c).ci_coverage;
}

std::string curves_csv(const AggregateReport& report) {
  std::ostringstream os;
  os << "t,mean_propensity,mean_regret,se_regret";
  for (const auto& g : report.groups) os << ",mean_regret_" << g.name << ",se_regret_" << g.name;
  os << '\n';
  for (std::size_t k = 0; k < report.t.size(); ++k) {
    os << report.t[k] << ',' << format_number(report.mean_propensity[k]) << ','
       << format_number(report.mean_regret[k]) << ',' << format_number(report.se_regret[k]);
    for (const auto& g : report.groups) {
      os << ',' << format_number(g.mean_regret[k]) << ',' << format_number(g.se_regret[k]);
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json summary_json(const AggregateReport& report) {
  nlohmann::json j;
  j["config"] = report.config;
  j["horizon"] = report.horizon;
  j["reps"] = report.reps;
  j["tau_hat_mean"] = report.tau_hat_mean;
  j["tau_hat_sd"] = report.tau_hat_sd;
  j["true_ate"] = report.true_ate;
  j["vb_hat_mean"] = report.vb_hat_mean;
  j["vb_hat_degenerate"] = report.vb_degenerate_count;
  j["ci_coverage"] = report.ci_coverage;
  j["final_regret_mean"] = report.final_regret_mean;
  j["final_regret_se"] = report.final_regret_se;
  nlohmann::json groups = nlohmann::json::object();
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    Moments prop, opt, err;
    for (const auto& s : report.replications) {
      prop.add(s.group_final_propensity[g]);
      if (!std::isnan(s.group_optimal_propensity[g])) {
        opt.add(s.group_optimal_propensity[g]);
        err.add(std::abs(s.group_final_propensity[g] - s.group_optimal_propensity[g]));
      }
    }
    const auto& gc = report.groups[g];
    groups[gc.name] = {
        {"final_regret_mean", gc.mean_regret.back()},
        {"final_regret_se", gc.se_regret.back()},
        {"mean_count", gc.mean_count.back()},
        {"final_propensity_mean", prop.mean()},
        {"optimal_propensity_mean", opt.mean()},
        {"mean_abs_propensity_error", err.mean()},
    };
  }
  j["per_group"] = groups;
  if (!report.groups.empty()) j["final_multigroup_regret_mean"] = report.final_multigroup_regret_mean;
  j["runtime_seconds"] = report.runtime_seconds;
  j["version"] = version();
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["metadata"] = {{"timestamp", stamp}};
  return j;
}

void write_report(const AggregateReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "curves.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "curves.csv").string());
    out << curves_csv(report);
    if (!out) throw std::runtime_error("write failed for " + (dir / "curves.csv").string());
  }
  std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  out << summary_json(report).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + (dir / "summary.json").string());
}

const std::vector<double>& CurveTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("curve table has no column '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

CurveTable read_curves(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  CurveTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(file.string() + " is empty");
  {
    std::istringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) table.header.push_back(cell);
  }
  table.columns.resize(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t j = 0;
    for (std::string cell; std::getline(ls, cell, ','); ++j) {
      if (j >= table.columns.size()) throw ParseError(file.string() + ": too many cells on row " + std::to_string(row));
      double v = kNaN;
      if (cell != "nan") {
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw ParseError(file.string() + ": bad number on row " + std::to_string(row));
        }
      }
      table.columns[j].push_back(v);
    }
    if (j != table.columns.size()) throw ParseError(file.string() + ": short row " + std::to_string(row));
  }
  return table;
}

nlohmann::json group_spec_to_json(const GroupSpec& spec) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : spec.groups) {
    switch (g.predicate.kind) {
      case GroupPredicate::Kind::All:
        groups.push_back({{"name", g.name}, {"type", "all"}});
        break;
      case GroupPredicate::Kind::Interval:
        groups.push_back({{"name", g.name}, {"type", "interval"}, {"field", g.predicate.field},
                          {"lo", g.predicate.lo}, {"hi", g.predicate.hi}});
        break;
      case GroupPredicate::Kind::Indicator:
        groups.push_back({{"name", g.name}, {"type", "column"}, {"column", g.predicate.field}});
        break;
    }
  }
  nlohmann::json j = {{"groups", groups}};
  if (spec.score_quantiles) {
    nlohmann::json th = nlohmann::json::array();
    for (const auto& [lo, hi] : spec.score_quantiles->thresholds) th.push_back({lo, hi});
    j["score_quantiles"] = {{"epsilon", spec.score_quantiles->epsilon},
                            {"thresholds", th},
                            {"include_all", spec.score_quantiles->include_all_group}};
  }
  return j;
}

GroupSpec parse_group_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("group specification must be a JSON object");
  GroupSpec spec;
  if (const auto* groups = find(doc, "groups")) {
    if (!groups->is_array()) throw ConfigError("'groups' must be an array");
    for (const auto& g : *groups) {
      const std::string name = g.at("name").get<std::string>();
      const std::string type = g.value("type", std::string("interval"));
      if (type == "all") {
        spec.groups.push_back({name, GroupPredicate::all()});
      } else if (type == "interval") {
        const double lo = g.contains("lo") ? g.at("lo").get<double>() : -std::numeric_limits<double>::infinity();
        const double hi = g.contains("hi") ? g.at("hi").get<double>() : std::numeric_limits<double>::infinity();
        spec.groups.push_back({name, GroupPredicate::interval(g.at("field").get<std::string>(), lo, hi)});
      } else if (type == "column") {
        spec.groups.push_back({name, GroupPredicate::indicator(g.at("column").get<std::string>())});
      } else {
        throw ConfigError("group '" + name + "' has unknown type '" + type + "'");
      }
    }
  }
  if (const auto* sq = find(doc, "score_quantiles")) {
    data::ScoreGroupSpec s;
    s.epsilon = sq->value("epsilon", s.epsilon);
    s.include_all_group = sq->value("include_all", s.include_all_group);
    if (const auto* th = find(*sq, "thresholds")) {
      s.thresholds.clear();
      for (const auto& pair : *th) {
        if (!pair.is_array() || pair.size() != 2) throw ConfigError("score thresholds must be [lo, hi] pairs");
        s.thresholds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
    }
    spec.score_quantiles = s;
  }
  if (spec.empty()) throw ConfigError("group specification defines no groups");
  return spec;
}

GroupSpec load_group_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open group specification " + file.string());
  try {
    return parse_group_spec(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("group specification " + file.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  if (const auto* g = std::get_if<data::GaussianSpec>(&cfg.source)) {
    j["source"] = {{"type", "gaussian"}, {"mu1", g->mu1}, {"mu0", g->mu0}, {"sigma", g->sigma},
                   {"horizon", g->T}, {"seed", g->seed}};
  } else if (const auto* d = std::get_if<data::DatasetSpec>(&cfg.source)) {
    nlohmann::json s = {{"type", "csv"},
                        {"path", d->path},
                        {"treated_column", d->treated_column},
                        {"control_column", d->control_column},
                        {"group_columns", d->group_columns},
                        {"resample", d->resample},
                        {"shuffle", d->shuffle},
                        {"seed", d->seed}};
    s["imputation_scale"] = d->imputation_scale ? nlohmann::json(*d->imputation_scale) : nlohmann::json();
    j["source"] = s;
  } else {
    const auto& mem = std::get<InMemorySource>(cfg.source);
    j["source"] = {{"type", "in-memory"}, {"size", mem.sequence ? mem.sequence->size() : 0}};
  }
  j["design"] = {{"type", to_string(cfg.design.kind)},
                 {"p", cfg.design.p},
                 {"c", cfg.design.c},
                 {"clipping", cfg.design.clipping}};
  j["groups"] = cfg.groups.empty() ? nlohmann::json() : group_spec_to_json(cfg.groups);
  j["horizon"] = cfg.horizon ? nlohmann::json(*cfg.horizon) : nlohmann::json();
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["fixed_population"] = cfg.population_is_fixed();
  j["regret"] = cfg.regret;
  j["per_group"] = cfg.per_group;
  j["out"] = cfg.out_dir.string();
  return j;
}

void apply_config_json(const nlohmann::json& doc, ExperimentConfig& cfg) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    if (const auto* s = find(doc, "source")) {
      const std::string type = s->at("type").get<std::string>();
      if (type == "gaussian") {
        data::GaussianSpec g = std::holds_alternative<data::GaussianSpec>(cfg.source)
                                   ? std::get<data::GaussianSpec>(cfg.source)
                                   : data::GaussianSpec{};
        g.mu1 = s->value("mu1", g.mu1);
        g.mu0 = s->value("mu0", g.mu0);
        g.sigma = s->value("sigma", g.sigma);
        g.T = s->value("horizon", g.T);
        g.seed = s->value("seed", g.seed);
        cfg.source = g;
      } else if (type == "csv") {
        data::DatasetSpec d = std::holds_alternative<data::DatasetSpec>(cfg.source)
                                  ? std::get<data::DatasetSpec>(cfg.source)
                                  : data::DatasetSpec{};
        d.path = s->value("path", d.path);
        d.treated_column = s->value("treated_column", d.treated_column);
        d.control_column = s->value("control_column", d.control_column);
        if (const auto* gc = find(*s, "group_columns")) d.group_columns = gc->get<std::vector<std::string>>();
        if (const auto* sc = find(*s, "imputation_scale")) d.imputation_scale = sc->get<double>();
        d.resample = s->value("resample", d.resample);
        d.shuffle = s->value("shuffle", d.shuffle);
        d.seed = s->value("seed", d.seed);
        cfg.source = d;
      } else {
        throw ConfigError("unknown source type '" + type + "'");
      }
    }
    if (const auto* d = find(doc, "design")) {
      if (const auto* type = find(*d, "type")) cfg.design.kind = design_kind_from_string(type->get<std::string>());
      cfg.design.p = d->value("p", cfg.design.p);
      cfg.design.c = d->value("c", cfg.design.c);
      cfg.design.clipping = d->value("clipping", cfg.design.clipping);
    }
    if (const auto* g = find(doc, "groups")) {
      cfg.groups = g->is_string() ? load_group_spec(g->get<std::string>()) : parse_group_spec(*g);
    }
    if (const auto* h = find(doc, "horizon")) cfg.horizon = h->get<std::int64_t>();
    cfg.reps = doc.value("reps", cfg.reps);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    if (const auto* f = find(doc, "fixed_population")) cfg.fixed_population = f->get<bool>();
    cfg.regret = doc.value("regret", cfg.regret);
    cfg.per_group = doc.value("per_group", cfg.per_group);
    cfg.threads = doc.value("threads", cfg.threads);
    if (const auto* o = find(doc, "out")) cfg.out_dir = o->get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
}

std::string version() { return ATE_VERSION; }

}  // namespace ate::harness
