#include "ate/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ate::evaluation {

namespace {

OptimalPropensity from_moments(double a, double b) {
  if (a == 0.0 && b == 0.0) throw DomainError("optimal propensity undefined: both arms are identically zero");
  const double ra = std::sqrt(a);
  const double rb = std::sqrt(b);
  OptimalPropensity out;
  out.p = ra / (ra + rb);
  out.value = (ra + rb) * (ra + rb);
  out.degenerate = a == 0.0 || b == 0.0;
  return out;
}

// Sum_{s<=t} f_s(p_s) - (sqrt(A_t) + sqrt(B_t))^2. Both arms zero so far means
// every f_s vanished, so the regret is 0.
double running_regret(double realized, double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;
  const double best = std::sqrt(a) + std::sqrt(b);
  return realized - best * best;
}

}  // namespace

double neyman_objective(double y1, double y0, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("neyman_objective: propensity must lie strictly inside (0,1)");
  return y1 * y1 / p + y0 * y0 / (1.0 - p);
}

OptimalPropensity optimal_propensity(std::span<const PotentialOutcomePair> units) {
  double a = 0.0;
  double b = 0.0;
  for (const auto& u : units) {
    a += u.y1 * u.y1;
    b += u.y0 * u.y0;
  }
  return from_moments(a, b);
}

double optimal_propensity_grid(std::span<const PotentialOutcomePair> units, double resolution) {
  if (!(resolution > 0.0 && resolution < 0.5)) throw ConfigError("grid resolution must lie in (0, 0.5)");
  const auto steps = static_cast<long>(std::llround(1.0 / resolution));
  double best_p = 0.5;
  double best = std::numeric_limits<double>::infinity();
  for (long k = 1; k < steps; ++k) {
    const double p = static_cast<double>(k) * resolution;
    double total = 0.0;
    for (const auto& u : units) total += neyman_objective(u.y1, u.y0, p);
    if (total < best) {
      best = total;
      best_p = p;
    }
  }
  return best_p;
}

RegretCurve neyman_regret(const Trajectory& traj, const OutcomeSequence& seq) {
  if (traj.size() != seq.size()) throw ConfigError("trajectory and outcome sequence lengths differ");
  RegretCurve curve;
  curve.values.resize(traj.size());
  double realized = 0.0;
  double a = 0.0;
  double b = 0.0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& u = seq[t];
    realized += neyman_objective(u.y1, u.y0, traj[t].p);
    a += u.y1 * u.y1;
    b += u.y0 * u.y0;
    curve.values[t] = running_regret(realized, a, b);
  }
  return curve;
}

GroupRegret group_regret(const Trajectory& traj, const OutcomeSequence& seq, const MembershipMatrix& membership) {
  if (traj.size() != seq.size() || membership.rows != seq.size()) {
    throw ConfigError("trajectory, outcome sequence and membership must align");
  }
  const std::size_t d = membership.cols;
  const std::size_t T = seq.size();
  GroupRegret out;
  out.groups.resize(d);
  out.multigroup.assign(T, 0.0);
  for (std::size_t g = 0; g < d; ++g) {
    auto& curve = out.groups[g];
    curve.values.resize(T);
    curve.counts.resize(T);
    double realized = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::int64_t n = 0;
    for (std::size_t t = 0; t < T; ++t) {
      if (membership.at(t, g)) {
        const auto& u = seq[t];
        realized += neyman_objective(u.y1, u.y0, traj[t].p);
        a += u.y1 * u.y1;
        b += u.y0 * u.y0;
        ++n;
      }
      curve.values[t] = running_regret(realized, a, b);
      curve.counts[t] = n;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    double worst = d == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < d; ++g) worst = std::max(worst, out.groups[g].values[t]);
    out.multigroup[t] = worst;
  }
  return out;
}

}  // namespace ate::evaluation
