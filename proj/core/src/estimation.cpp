#include "ate/estimation.hpp"

#include <cmath>

namespace ate {

AteEstimate ipw_estimate(const Trajectory& traj) {
  if (traj.empty()) throw ConfigError("cannot estimate from an empty trajectory");
  double sum = 0.0;
  for (const auto& r : traj.records()) {
    sum += r.z == 1 ? r.y_obs / r.p : -r.y_obs / (1.0 - r.p);
  }
  const auto T = static_cast<std::int64_t>(traj.size());
  return {sum / static_cast<double>(T), T};
}

double true_ate(const OutcomeSequence& seq) {
  if (seq.empty()) throw ConfigError("cannot compute the ATE of an empty sequence");
  double sum = 0.0;
  for (const auto& u : seq.units()) sum += u.y1 - u.y0;
  return sum / static_cast<double>(seq.size());
}

VarianceBoundEstimate variance_bound_estimate(const Trajectory& traj) {
  if (traj.empty()) throw ConfigError("cannot estimate from an empty trajectory");
  double treated = 0.0;
  double control = 0.0;
  for (const auto& r : traj.records()) {
    const double y2 = r.y_obs * r.y_obs;
    if (r.z == 1) {
      treated += y2 / r.p;
    } else {
      control += y2 / (1.0 - r.p);
    }
  }
  const double T = static_cast<double>(traj.size());
  VarianceBoundEstimate out;
  out.treated_moment = treated / T;
  out.control_moment = control / T;
  out.vb_hat = 4.0 / T * std::sqrt(out.treated_moment * out.control_moment);
  out.degenerate = out.treated_moment == 0.0 || out.control_moment == 0.0;
  return out;
}

ConfidenceInterval chebyshev_ci(const AteEstimate& est, const VarianceBoundEstimate& vb, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("confidence level alpha must lie in (0, 1]");
  const double half = std::sqrt(vb.vb_hat / alpha);
  return {est.tau_hat - half, est.tau_hat + half, alpha, half == 0.0};
}

CorrelationDiagnostic correlation_diagnostic(const OutcomeSequence& seq) {
  if (seq.empty()) throw ConfigError("empty outcome sequence");
  double m1 = 0.0;
  double m0 = 0.0;
  double cross = 0.0;
  for (const auto& u : seq.units()) {
    m1 += u.y1 * u.y1;
    m0 += u.y0 * u.y0;
    cross += u.y1 * u.y0;
  }
  const double T = static_cast<double>(seq.size());
  CorrelationDiagnostic d;
  d.s1 = std::sqrt(m1 / T);
  d.s0 = std::sqrt(m0 / T);
  if (d.s1 == 0.0 || d.s0 == 0.0) {
    throw DomainError(d.s1 == 0.0 ? "treated outcomes have zero second moment"
                                  : "control outcomes have zero second moment");
  }
  d.rho = (cross / T) / (d.s1 * d.s0);
  d.vb = 4.0 / T * d.s1 * d.s0;
  return d;
}

}  // namespace ate
