#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ate/rng.hpp"

namespace ate {

/// Invalid configuration or an incompatible design/data combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the mathematical domain of an operation
/// (e.g. a propensity on the boundary of (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input data.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialOutcomePair {
  double y1 = 0.0;  // treatment outcome
  double y0 = 0.0;  // control outcome
};

/// Read-only view of one unit's covariate record. Field names are shared
/// across the whole sequence.
struct Covariate {
  std::span<const std::string> names;
  std::span<const double> values;

  std::optional<double> get(std::string_view field) const;
};

/// Potential outcomes generated upfront, optionally with aligned covariates.
class OutcomeSequence {
 public:
  OutcomeSequence() = default;
  explicit OutcomeSequence(std::vector<PotentialOutcomePair> units);
  OutcomeSequence(std::vector<PotentialOutcomePair> units,
                  std::vector<std::string> covariate_names,
                  std::vector<std::vector<double>> covariates);

  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  const PotentialOutcomePair& operator[](std::size_t i) const { return units_[i]; }
  std::span<const PotentialOutcomePair> units() const { return units_; }

  bool has_covariates() const { return !covariate_names_.empty(); }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  Covariate covariate(std::size_t i) const;

  /// Appends a covariate column (e.g. a computed group indicator).
  void add_covariate_column(std::string name, std::span<const double> column);

  /// First `n` units (with their covariates).
  OutcomeSequence prefix(std::size_t n) const;

 private:
  std::vector<PotentialOutcomePair> units_;
  std::vector<std::string> covariate_names_;
  std::vector<std::vector<double>> covariates_;  // row-major, one row per unit
};

struct AssignmentRecord {
  std::int64_t t = 0;  // 1-based round index
  double p = 0.5;
  int z = 0;
  double y_obs = 0.0;
};

/// Per-round (propensity, decision, observed outcome) history. Records are
/// appended with consecutive round indices starting at 1.
class Trajectory {
 public:
  void append(double p, int z, double y_obs);
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const AssignmentRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const AssignmentRecord> records() const { return records_; }
  void reserve(std::size_t n) { records_.reserve(n); }

 private:
  std::vector<AssignmentRecord> records_;
};

struct BoundednessConstants {
  double c = 1.0;     // lower bound
  double bigC = 1.0;  // upper bound

  BoundednessConstants(double lower, double upper);
};

struct BoundsCheck {
  bool ok = true;
  std::string diagnostic;
  std::int64_t round = 0;  // 1-based round of first violation, 0 when ok

  explicit operator bool() const { return ok; }
};

/// Checks the potential-outcome boundedness assumption on every prefix.
BoundsCheck verify_bounds(const OutcomeSequence& seq, const BoundednessConstants& k);

/// The round protocol: a design emits a propensity (optionally after seeing
/// the unit's covariates), then receives only the realized decision and
/// outcome. Designs are deterministic given feedback.
class AdaptiveDesign {
 public:
  virtual ~AdaptiveDesign() = default;

  virtual bool contextual() const { return false; }
  virtual double propose(const Covariate* x) = 0;
  virtual void observe(int z, double y_obs) = 0;
};

/// Source of treatment coins. The default draws Bernoulli(p) from an Rng;
/// tests may substitute a scripted sequence.
class CoinSource {
 public:
  virtual ~CoinSource() = default;
  virtual int flip(double p) = 0;
};

class RngCoins final : public CoinSource {
 public:
  explicit RngCoins(Rng& rng) : rng_(rng) {}
  int flip(double p) override { return rng_.bernoulli(p) ? 1 : 0; }

 private:
  Rng& rng_;
};

/// Replays a fixed 0/1 sequence regardless of p.
class ScriptedCoins final : public CoinSource {
 public:
  explicit ScriptedCoins(std::vector<int> coins) : coins_(std::move(coins)) {}
  int flip(double p) override;

 private:
  std::vector<int> coins_;
  std::size_t next_ = 0;
};

/// Runs `design` over every unit of `seq`, one AssignmentRecord per unit.
Trajectory run_design(AdaptiveDesign& design, const OutcomeSequence& seq, CoinSource& coins);
Trajectory run_design(AdaptiveDesign& design, const OutcomeSequence& seq, Rng& rng);

}  // namespace ate
