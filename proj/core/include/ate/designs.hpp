#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "ate/core.hpp"

namespace ate {

/// Strictly increasing clipping function h with h(t) > 2; the clipping rate
/// is 1/h(t).
struct ClippingFunction {
  std::string name;
  std::function<double(double)> h;

  double operator()(double t) const { return h(t); }

  /// h(t) = exp((ln(t + 2))^(1/4)), the experimental default.
  static ClippingFunction exp_loglog();
  /// h(t) = 2 + ln(t + 1).
  static ClippingFunction log_growth();
  /// Lookup by name ("exp-loglog" or "log").
  static ClippingFunction by_name(const std::string& name);
};

/// Learning-rate and clipping-rate schedules indexed by round t >= 1.
/// delta(t) lies in (0, 0.5]; delta = 0.5 pins the propensity at 0.5.
struct Schedule {
  std::function<double(std::int64_t)> eta;
  std::function<double(std::int64_t)> delta;
};

/// Horizon-dependent schedule: eta = 1/sqrt(T), delta(t) = 0.5 t^(-1/sqrt(5 ln T)).
Schedule schedule_zero(std::int64_t horizon);

/// Anytime schedule for 2c^2-strongly-convex objectives:
/// eta(t) = 1/(2 c^2 t), delta(t) = 1/h(t).
Schedule schedule_sc(double c, ClippingFunction h = ClippingFunction::exp_loglog());

/// Unbiased one-sample estimate of f'(p) where f(p) = y1^2/p + y0^2/(1-p):
///   Y^2 (-z/p^3 + (1-z)/(1-p)^3)
double gradient_estimate(double y_obs, int z, double p);

/// f'(p) for known potential outcomes.
double neyman_derivative(double y1, double y0, double p);

/// A noncontextual design driven by first-order feedback: it emits a
/// propensity, then accepts an (unbiased) estimate of f'_t at that propensity.
class FirstOrderDesign {
 public:
  virtual ~FirstOrderDesign() = default;

  virtual double propose() = 0;
  virtual void feedback(double gradient) = 0;
};

using FirstOrderFactory = std::function<std::unique_ptr<FirstOrderDesign>()>;

struct ClipOgdState {
  std::int64_t t = 1;    // next round index
  double p_prev = 0.5;   // p_{t-1}
  double g_prev = 0.0;   // g_{t-1}, unclipped
};

/// Projected online gradient descent with time-varying clipping.
/// Round t: p_t = clamp(p_{t-1} - eta(t) g_{t-1}, delta(t), 1 - delta(t)).
class ClipOgd final : public FirstOrderDesign {
 public:
  explicit ClipOgd(Schedule schedule);

  double propose() override;
  void feedback(double gradient) override { state_.g_prev = gradient; }

  const ClipOgdState& state() const { return state_; }
  const Schedule& schedule() const { return schedule_; }

 private:
  Schedule schedule_;
  ClipOgdState state_;
};

/// Constant propensity; ignores feedback.
class FixedPropensity final : public FirstOrderDesign {
 public:
  explicit FixedPropensity(double p);

  double propose() override { return p_; }
  void feedback(double /*gradient*/) override {}

 private:
  double p_;
};

/// Runs a first-order design under the standard round protocol, feeding it
/// gradient_estimate(Y, Z, p) after each round.
class NoncontextualDesign final : public AdaptiveDesign {
 public:
  explicit NoncontextualDesign(std::unique_ptr<FirstOrderDesign> base);

  double propose(const Covariate* x) override;
  void observe(int z, double y_obs) override;

  FirstOrderDesign& base() { return *base_; }

 private:
  std::unique_ptr<FirstOrderDesign> base_;
  double last_p_ = 0.5;
};

std::unique_ptr<NoncontextualDesign> fixed_design(double p);
std::unique_ptr<NoncontextualDesign> clip_ogd_zero(std::int64_t horizon);
std::unique_ptr<NoncontextualDesign> clip_ogd_sc(double c,
                                                 ClippingFunction h = ClippingFunction::exp_loglog());

}  // namespace ate
