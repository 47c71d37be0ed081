#pragma once

#include <span>
#include <vector>

#include "ate/core.hpp"
#include "ate/multigroup.hpp"

/// Evaluation against the hindsight-optimal fixed propensity. Everything here
/// reads both potential outcomes and must never feed back into a design.
namespace ate::evaluation {

/// f(p) = y1^2/p + y0^2/(1-p).
double neyman_objective(double y1, double y0, double p);

struct OptimalPropensity {
  double p = 0.5;
  double value = 0.0;       // min over (0,1) of the summed objective (infimum when degenerate)
  bool degenerate = false;  // one arm is identically zero; p sits on the open boundary
};

/// Closed form: with A = sum y(1)^2 and B = sum y(0)^2, p* = sqrt(A)/(sqrt(A)+sqrt(B))
/// and the minimum is (sqrt(A)+sqrt(B))^2. Throws DomainError when A = B = 0.
OptimalPropensity optimal_propensity(std::span<const PotentialOutcomePair> units);

/// Brute-force minimizer of sum f_t(p) over {res, 2 res, ..., 1 - res}.
double optimal_propensity_grid(std::span<const PotentialOutcomePair> units, double resolution);

/// Running regret: values[t-1] = sum_{s<=t} f_s(p_s) - min_p sum_{s<=t} f_s(p).
struct RegretCurve {
  std::vector<double> values;

  double final() const { return values.empty() ? 0.0 : values.back(); }
};

RegretCurve neyman_regret(const Trajectory& traj, const OutcomeSequence& seq);

struct GroupRegretCurve {
  std::vector<double> values;         // regret on the group's units among the first t rounds
  std::vector<std::int64_t> counts;   // number of the first t units in the group
};

struct GroupRegret {
  std::vector<GroupRegretCurve> groups;
  std::vector<double> multigroup;  // max over groups, per t
};

GroupRegret group_regret(const Trajectory& traj, const OutcomeSequence& seq, const MembershipMatrix& membership);

}  // namespace ate::evaluation
