#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ate/core.hpp"
#include "ate/designs.hpp"
#include "ate/olo.hpp"

namespace ate {

/// Membership predicate over a covariate record.
struct GroupPredicate {
  enum class Kind { All, Interval, Indicator };

  Kind kind = Kind::All;
  std::string field;  // Interval / Indicator
  double lo = 0.0;    // Interval bounds, both inclusive
  double hi = 0.0;

  static GroupPredicate all() { return {}; }
  static GroupPredicate interval(std::string field, double lo, double hi);
  /// Member iff the named field equals 1.
  static GroupPredicate indicator(std::string field);

  bool contains(const Covariate& x) const;
};

struct Group {
  std::string name;
  GroupPredicate predicate;
};

/// Row-major T x d 0/1 membership table.
struct MembershipMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;

  MembershipMatrix() = default;
  MembershipMatrix(std::size_t rows, std::size_t cols) : rows(rows), cols(cols), cells(rows * cols, 0) {}

  std::span<const std::uint8_t> row(std::size_t t) const { return {cells.data() + t * cols, cols}; }
  std::uint8_t& at(std::size_t t, std::size_t g) { return cells[t * cols + g]; }
  std::uint8_t at(std::size_t t, std::size_t g) const { return cells[t * cols + g]; }
};

/// Ordered, possibly overlapping family of named groups.
class GroupFamily {
 public:
  GroupFamily() = default;
  explicit GroupFamily(std::vector<Group> groups);

  std::size_t size() const { return groups_.size(); }
  const std::vector<Group>& groups() const { return groups_; }
  std::vector<std::string> names() const;

  MembershipMatrix membership(const OutcomeSequence& seq) const;

 private:
  std::vector<Group> groups_;
};

/// a_G = 1 iff x belongs to G. May be all zeros.
olo::ActivityVector active_groups(const Covariate& x, const GroupFamily& family);

/// <v, p>: convex combination of the active group propensities.
double effective_propensity(std::span<const double> dist, std::span<const double> group_propensities);

/// Importance-weighted gradient of f_t at p_G when the coin used p_eff:
///   Y^2 (Z/p_eff + (1-Z)/(1-p_eff)) (-Z/p_G^2 + (1-Z)/(1-p_G)^2)
double mgate_gradient(double y_obs, int z, double p_eff, double p_group);

/// Importance-weighted value of f_t at p_G when the coin used p_eff:
///   Y^2 (Z/p_eff + (1-Z)/(1-p_eff)) (Z/p_G + (1-Z)/(1-p_G))
double mgate_loss(double y_obs, int z, double p_eff, double p_group);

struct MgateState {
  std::vector<double> group_propensity;    // next propensity of each group
  std::vector<std::int64_t> group_count;   // rounds each group has been active
  std::vector<double> weights;             // unnormalized group weights w'
  olo::SoloState solo;                     // L, q

  explicit MgateState(std::size_t groups)
      : group_propensity(groups, 0.5), group_count(groups, 0), weights(groups, 1.0), solo(groups) {}
};

/// One round's intermediate quantities, kept for inspection.
struct MgateRound {
  olo::ActivityVector active;
  std::vector<double> distribution;  // w_eff
  double p_eff = 0.5;
  bool skipped = false;              // no active group
};

/// Multigroup design: per-group clipped strongly-convex OGD, aggregated by
/// SOLO sleeping experts. Each group's schedule advances on its own
/// activation count, never on global time.
class Mgate final : public AdaptiveDesign {
 public:
  Mgate(GroupFamily family, double c, ClippingFunction h = ClippingFunction::exp_loglog(),
        double fallback_propensity = 0.5);

  bool contextual() const override { return true; }
  double propose(const Covariate* x) override;
  void observe(int z, double y_obs) override;

  /// Same as propose() for a precomputed activity vector.
  double propose_active(std::span<const std::uint8_t> active);

  const MgateState& state() const { return state_; }
  const MgateRound& last_round() const { return round_; }
  const GroupFamily& family() const { return family_; }

 private:
  GroupFamily family_;
  double two_c2_;
  ClippingFunction h_;
  double fallback_;
  MgateState state_;
  MgateRound round_;
};

/// General multigroup meta-design: one copy of a first-order base design per
/// group, combined through any sleeping-experts aggregator.
class MultigroupDesign final : public AdaptiveDesign {
 public:
  MultigroupDesign(GroupFamily family, const FirstOrderFactory& base,
                   std::unique_ptr<olo::SleepingExperts> aggregator, double fallback_propensity = 0.5);

  bool contextual() const override { return true; }
  double propose(const Covariate* x) override;
  void observe(int z, double y_obs) override;

  double propose_active(std::span<const std::uint8_t> active);

  /// Last propensity each group's copy emitted (0.5 before its first activation).
  const std::vector<double>& group_propensities() const { return group_p_; }
  const MgateRound& last_round() const { return round_; }

 private:
  GroupFamily family_;
  std::vector<std::unique_ptr<FirstOrderDesign>> copies_;
  std::unique_ptr<olo::SleepingExperts> aggregator_;
  double fallback_;
  std::vector<double> group_p_;
  MgateRound round_;
};

std::unique_ptr<Mgate> mgate_design(GroupFamily family, double c,
                                    ClippingFunction h = ClippingFunction::exp_loglog());

}  // namespace ate
