#include "ate/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace ate::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    std::ostringstream os;
    os << "row " << row << ", column '" << column << "': cannot parse '" << cell << "' as a number";
    throw ParseError(os.str());
  }
  return value;
}

}  // namespace

OutcomeSequence gen_gaussian(const GaussianSpec& spec) {
  if (!(spec.sigma > 0.0)) throw ConfigError("Gaussian sigma must be positive");
  if (spec.T < 1) throw ConfigError("Gaussian horizon T must be at least 1");
  Rng rng(spec.seed);
  std::vector<PotentialOutcomePair> units(static_cast<std::size_t>(spec.T));
  for (auto& u : units) {
    u.y1 = rng.normal(spec.mu1, spec.sigma);
    u.y0 = rng.normal(spec.mu0, spec.sigma);
  }
  return OutcomeSequence(std::move(units));
}

Dataset ingest_csv(const DatasetSpec& spec) {
  if (spec.resample < 1) throw ConfigError("resample factor must be at least 1");
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset '" + spec.path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset '" + spec.path + "' has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("missing column '" + name + "' in '" + spec.path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t treated = column_index(spec.treated_column);
  const std::size_t control = column_index(spec.control_column);

  std::vector<std::string> group_cols = spec.group_columns;
  if (group_cols.empty()) {
    for (const auto& h : header) {
      if (h.rfind("g_", 0) == 0) group_cols.push_back(h);
    }
  }
  std::vector<std::size_t> group_idx;
  for (const auto& g : group_cols) group_idx.push_back(column_index(g));

  // Covariates: every column other than the two outcomes, group columns last.
  std::vector<std::size_t> covariate_idx;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const bool is_group = std::find(group_idx.begin(), group_idx.end(), j) != group_idx.end();
    if (j != treated && j != control && !is_group) covariate_idx.push_back(j);
  }
  covariate_idx.insert(covariate_idx.end(), group_idx.begin(), group_idx.end());

  // Numeric table with NaN marking missing cells.
  const double missing = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> table;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row_number << ": expected " << header.size() << " cells, found " << cells.size();
      throw ParseError(os.str());
    }
    std::vector<double> row(header.size(), missing);
    for (std::size_t j = 0; j < header.size(); ++j) {
      const std::string cell = trim(cells[j]);
      const bool is_group = std::find(group_idx.begin(), group_idx.end(), j) != group_idx.end();
      if (is_missing(cell)) {
        if (is_group) {
          std::ostringstream os;
          os << "row " << row_number << ": group column '" << header[j] << "' has a missing value";
          throw ParseError(os.str());
        }
        continue;
      }
      row[j] = parse_number(cell, row_number, header[j]);
      if (is_group && row[j] != 0.0 && row[j] != 1.0) {
        std::ostringstream os;
        os << "row " << row_number << ": group column '" << header[j] << "' must be 0 or 1";
        throw ParseError(os.str());
      }
    }
    table.push_back(std::move(row));
  }
  if (table.empty()) throw ParseError("dataset '" + spec.path + "' has no data rows");

  Rng rng(spec.seed);
  for (std::size_t j = 0; j < header.size(); ++j) {
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t present = 0;
    for (const auto& row : table) {
      if (!std::isnan(row[j])) {
        sum += row[j];
        ++present;
      }
    }
    if (present == table.size()) continue;
    if (present == 0) throw ParseError("column '" + header[j] + "' has no observed values");
    const double mean = sum / static_cast<double>(present);
    for (const auto& row : table) {
      if (!std::isnan(row[j])) sumsq += (row[j] - mean) * (row[j] - mean);
    }
    const double sd = present > 1 ? std::sqrt(sumsq / static_cast<double>(present - 1)) : 0.0;
    const double scale = spec.imputation_scale.value_or(sd);
    for (auto& row : table) {
      if (std::isnan(row[j])) row[j] = scale > 0.0 ? rng.normal(mean, scale) : mean;
    }
  }

  std::vector<std::size_t> order;
  order.reserve(table.size() * static_cast<std::size_t>(spec.resample));
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (int k = 0; k < spec.resample; ++k) order.push_back(i);
  }
  if (spec.shuffle) std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<PotentialOutcomePair> units;
  std::vector<std::vector<double>> covariates;
  units.reserve(order.size());
  covariates.reserve(order.size());
  for (std::size_t i : order) {
    const auto& row = table[i];
    units.push_back({row[treated], row[control]});
    std::vector<double> x;
    x.reserve(covariate_idx.size());
    for (std::size_t j : covariate_idx) x.push_back(row[j]);
    covariates.push_back(std::move(x));
  }
  std::vector<std::string> covariate_names;
  for (std::size_t j : covariate_idx) covariate_names.push_back(header[j]);

  Dataset out;
  out.sequence = OutcomeSequence(std::move(units), std::move(covariate_names), std::move(covariates));
  if (!group_cols.empty()) {
    std::vector<Group> groups;
    for (const auto& col : group_cols) {
      groups.push_back({col.rfind("g_", 0) == 0 ? col.substr(2) : col, GroupPredicate::indicator(col)});
    }
    out.groups = GroupFamily(std::move(groups));
    out.membership = out.groups.membership(out.sequence);
  }
  return out;
}

double neyman_score(double y1, double y0, double epsilon) {
  return 1.0 / (1.0 + (y0 * y0) / (y1 * y1 + epsilon));
}

ScoreGroups score_quantile_groups(const OutcomeSequence& seq, const ScoreGroupSpec& spec) {
  if (seq.empty()) throw ConfigError("cannot build score groups on an empty sequence");
  if (spec.epsilon < 0.0) throw ConfigError("score epsilon must be nonnegative");
  for (const auto& [lo, hi] : spec.thresholds) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ConfigError("score quantile thresholds need 0 <= lo < hi <= 1");
  }
  const std::size_t n = seq.size();
  ScoreGroups out;
  out.scores.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.scores[t] = neyman_score(seq[t].y1, seq[t].y0, spec.epsilon);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.scores[a] < out.scores[b]; });
  out.ranks.resize(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && out.scores[order[j]] == out.scores[order[i]]) ++j;
    // i units strictly below, (j - i) tied.
    const double r = (static_cast<double>(i) + 0.5 * static_cast<double>(j - i)) / static_cast<double>(n);
    for (std::size_t k = i; k < j; ++k) out.ranks[order[k]] = r;
    i = j;
  }

  std::vector<Group> groups;
  std::vector<std::pair<double, double>> bounds;
  if (spec.include_all_group) {
    groups.push_back({"G0", GroupPredicate::indicator("g_G0")});
    bounds.emplace_back(-1.0, 2.0);
  }
  for (std::size_t k = 0; k < spec.thresholds.size(); ++k) {
    const std::string name = "G" + std::to_string(k + 1);
    groups.push_back({name, GroupPredicate::indicator("g_" + name)});
    bounds.push_back(spec.thresholds[k]);
  }
  out.membership = MembershipMatrix(n, groups.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      out.membership.at(t, g) = out.ranks[t] >= bounds[g].first && out.ranks[t] <= bounds[g].second ? 1 : 0;
    }
  }
  out.family = GroupFamily(std::move(groups));
  return out;
}

void attach_groups(OutcomeSequence& seq, const ScoreGroups& groups) {
  if (groups.membership.rows != seq.size()) throw ConfigError("score groups do not match the sequence");
  std::vector<double> column(seq.size());
  for (std::size_t g = 0; g < groups.family.size(); ++g) {
    for (std::size_t t = 0; t < seq.size(); ++t) column[t] = groups.membership.at(t, g);
    seq.add_covariate_column(groups.family.groups()[g].predicate.field, column);
  }
}

}  // namespace ate::data
