#pragma once

#include <cstdint>

#include "ate/core.hpp"

namespace ate {

struct AteEstimate {
  double tau_hat = 0.0;
  std::int64_t T = 0;
};

/// Conservative variance-bound estimate built from observed outcomes only.
struct VarianceBoundEstimate {
  double vb_hat = 0.0;
  double treated_moment = 0.0;  // (1/T) sum Y^2 Z / p
  double control_moment = 0.0;  // (1/T) sum Y^2 (1-Z) / (1-p)
  bool degenerate = false;      // one arm never observed with a nonzero outcome
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 1.0;
  bool degenerate = false;  // zero width

  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct CorrelationDiagnostic {
  double rho = 0.0;
  double s1 = 0.0;  // sqrt((1/T) sum y(1)^2)
  double s0 = 0.0;
  double vb = 0.0;  // (4/T) S(1) S(0)
};

/// tau_hat = (1/T) sum Y (Z/p - (1-Z)/(1-p)).
AteEstimate ipw_estimate(const Trajectory& traj);

/// Mean of y(1) - y(0); needs both counterfactuals, so simulation only.
double true_ate(const OutcomeSequence& seq);

/// (4/T) sqrt(treated_moment * control_moment).
VarianceBoundEstimate variance_bound_estimate(const Trajectory& traj);

/// tau_hat +- alpha^(-1/2) sqrt(vb_hat), alpha in (0, 1].
ConfidenceInterval chebyshev_ci(const AteEstimate& est, const VarianceBoundEstimate& vb, double alpha);

/// Running correlation of the two outcome populations and the population
/// variance bound. Throws DomainError when either second moment is zero.
CorrelationDiagnostic correlation_diagnostic(const OutcomeSequence& seq);

}  // namespace ate
