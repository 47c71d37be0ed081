#include "ate/core.hpp"

#include <cmath>
#include <sstream>

namespace ate {

std::optional<double> Covariate::get(std::string_view field) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == field) return values[i];
  }
  return std::nullopt;
}

OutcomeSequence::OutcomeSequence(std::vector<PotentialOutcomePair> units)
    : units_(std::move(units)) {
  for (const auto& u : units_) {
    if (!std::isfinite(u.y1) || !std::isfinite(u.y0)) {
      throw DomainError("potential outcomes must be finite");
    }
  }
}

OutcomeSequence::OutcomeSequence(std::vector<PotentialOutcomePair> units,
                                 std::vector<std::string> covariate_names,
                                 std::vector<std::vector<double>> covariates)
    : OutcomeSequence(std::move(units)) {
  if (covariates.size() != units_.size()) {
    throw ConfigError("covariates must align 1:1 with units");
  }
  for (const auto& row : covariates) {
    if (row.size() != covariate_names.size()) {
      throw ConfigError("covariate row width does not match field names");
    }
  }
  covariate_names_ = std::move(covariate_names);
  covariates_ = std::move(covariates);
}

Covariate OutcomeSequence::covariate(std::size_t i) const {
  if (!has_covariates()) return {};
  return {covariate_names_, covariates_[i]};
}

void OutcomeSequence::add_covariate_column(std::string name, std::span<const double> column) {
  if (column.size() != units_.size()) {
    throw ConfigError("covariate column '" + name + "' has wrong length");
  }
  if (covariates_.empty()) covariates_.resize(units_.size());
  covariate_names_.push_back(std::move(name));
  for (std::size_t i = 0; i < column.size(); ++i) covariates_[i].push_back(column[i]);
}

OutcomeSequence OutcomeSequence::prefix(std::size_t n) const {
  n = std::min(n, units_.size());
  OutcomeSequence out;
  out.units_.assign(units_.begin(), units_.begin() + static_cast<std::ptrdiff_t>(n));
  if (has_covariates()) {
    out.covariate_names_ = covariate_names_;
    out.covariates_.assign(covariates_.begin(), covariates_.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

void Trajectory::append(double p, int z, double y_obs) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("propensity must lie strictly inside (0,1)");
  records_.push_back({static_cast<std::int64_t>(records_.size()) + 1, p, z, y_obs});
}

BoundednessConstants::BoundednessConstants(double lower, double upper) : c(lower), bigC(upper) {
  if (!(lower > 0.0) || !(upper >= lower)) {
    throw ConfigError("boundedness constants require 0 < c <= C");
  }
}

BoundsCheck verify_bounds(const OutcomeSequence& seq, const BoundednessConstants& k) {
  auto fail = [](std::string what, std::size_t i) {
    std::ostringstream os;
    os << what << " at round " << (i + 1);
    return BoundsCheck{false, os.str(), static_cast<std::int64_t>(i + 1)};
  };
  const double c2 = k.c * k.c;
  double sum1 = 0.0;
  double sum0 = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& u = seq[i];
    if (std::max(std::abs(u.y1), std::abs(u.y0)) > k.bigC) return fail("outcome above C", i);
    if (u.y1 * u.y1 + u.y0 * u.y0 < c2) return fail("per-unit norm below c", i);
    sum1 += u.y1 * u.y1;
    sum0 += u.y0 * u.y0;
    const double n = static_cast<double>(i + 1);
    if (sum1 / n < c2) return fail("treated-arm second moment below c", i);
    if (sum0 / n < c2) return fail("control-arm second moment below c", i);
  }
  return {};
}

int ScriptedCoins::flip(double /*p*/) {
  if (next_ >= coins_.size()) throw ConfigError("scripted coin sequence exhausted");
  return coins_[next_++] != 0 ? 1 : 0;
}

Trajectory run_design(AdaptiveDesign& design, const OutcomeSequence& seq, CoinSource& coins) {
  if (seq.empty()) throw ConfigError("outcome sequence is empty");
  if (design.contextual() && !seq.has_covariates()) {
    throw ConfigError("contextual design requires a sequence with covariates");
  }
  Trajectory traj;
  traj.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Covariate x = seq.covariate(i);
    const double p = design.propose(design.contextual() ? &x : nullptr);
    const int z = coins.flip(p);
    const double y = z == 1 ? seq[i].y1 : seq[i].y0;
    traj.append(p, z, y);
    design.observe(z, y);
  }
  return traj;
}

Trajectory run_design(AdaptiveDesign& design, const OutcomeSequence& seq, Rng& rng) {
  RngCoins coins(rng);
  return run_design(design, seq, coins);
}

}  // namespace ate
