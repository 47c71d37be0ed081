#include "ate/designs.hpp"

#include <algorithm>
#include <cmath>

namespace ate {

namespace {

void require_interior(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(what) + ": propensity must lie strictly inside (0,1)");
  }
}

}  // namespace

ClippingFunction ClippingFunction::exp_loglog() {
  return {"exp-loglog", [](double t) { return std::exp(std::pow(std::log(t + 2.0), 0.25)); }};
}

ClippingFunction ClippingFunction::log_growth() {
  return {"log", [](double t) { return 2.0 + std::log(t + 1.0); }};
}

ClippingFunction ClippingFunction::by_name(const std::string& name) {
  if (name == "exp-loglog") return exp_loglog();
  if (name == "log") return log_growth();
  throw ConfigError("unknown clipping function '" + name + "'");
}

Schedule schedule_zero(std::int64_t horizon) {
  if (horizon < 2) throw ConfigError("ClipOGD0 schedule needs a horizon T >= 2");
  const double T = static_cast<double>(horizon);
  const double eta = 1.0 / std::sqrt(T);
  const double alpha = std::sqrt(5.0 * std::log(T));
  return {
      [eta](std::int64_t) { return eta; },
      [alpha](std::int64_t t) { return 0.5 * std::pow(static_cast<double>(t), -1.0 / alpha); },
  };
}

Schedule schedule_sc(double c, ClippingFunction h) {
  if (!(c > 0.0)) throw ConfigError("strong-convexity constant c must be positive");
  const double two_c2 = 2.0 * c * c;
  return {
      [two_c2](std::int64_t t) { return 1.0 / (two_c2 * static_cast<double>(t)); },
      [h = std::move(h)](std::int64_t t) { return 1.0 / h(static_cast<double>(t)); },
  };
}

double gradient_estimate(double y_obs, int z, double p) {
  require_interior(p, "gradient_estimate");
  const double y2 = y_obs * y_obs;
  if (z == 1) return -y2 / (p * p * p);
  const double q = 1.0 - p;
  return y2 / (q * q * q);
}

double neyman_derivative(double y1, double y0, double p) {
  require_interior(p, "neyman_derivative");
  const double q = 1.0 - p;
  return -y1 * y1 / (p * p) + y0 * y0 / (q * q);
}

ClipOgd::ClipOgd(Schedule schedule) : schedule_(std::move(schedule)) {}

double ClipOgd::propose() {
  const std::int64_t t = state_.t;
  const double delta = schedule_.delta(t);
  const double step = state_.p_prev - schedule_.eta(t) * state_.g_prev;
  const double p = std::clamp(step, delta, 1.0 - delta);
  state_.p_prev = p;
  state_.t = t + 1;
  return p;
}

FixedPropensity::FixedPropensity(double p) : p_(p) { require_interior(p, "fixed_design"); }

NoncontextualDesign::NoncontextualDesign(std::unique_ptr<FirstOrderDesign> base)
    : base_(std::move(base)) {}

double NoncontextualDesign::propose(const Covariate* /*x*/) {
  last_p_ = base_->propose();
  return last_p_;
}

void NoncontextualDesign::observe(int z, double y_obs) {
  base_->feedback(gradient_estimate(y_obs, z, last_p_));
}

std::unique_ptr<NoncontextualDesign> fixed_design(double p) {
  return std::make_unique<NoncontextualDesign>(std::make_unique<FixedPropensity>(p));
}

std::unique_ptr<NoncontextualDesign> clip_ogd_zero(std::int64_t horizon) {
  return std::make_unique<NoncontextualDesign>(std::make_unique<ClipOgd>(schedule_zero(horizon)));
}

std::unique_ptr<NoncontextualDesign> clip_ogd_sc(double c, ClippingFunction h) {
  return std::make_unique<NoncontextualDesign>(
      std::make_unique<ClipOgd>(schedule_sc(c, std::move(h))));
}

}  // namespace ate
