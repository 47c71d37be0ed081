#include "ate/multigroup.hpp"

#include <algorithm>
#include <cmath>

namespace ate {

namespace {

void require_interior(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(what) + ": propensities must lie strictly inside (0,1)");
  }
}

// Z/p_eff + (1-Z)/(1-p_eff)
double inverse_assignment_weight(int z, double p_eff) {
  return z == 1 ? 1.0 / p_eff : 1.0 / (1.0 - p_eff);
}

bool any_active(std::span<const std::uint8_t> active) {
  return std::any_of(active.begin(), active.end(), [](std::uint8_t a) { return a != 0; });
}

}  // namespace

GroupPredicate GroupPredicate::interval(std::string field, double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("interval group needs lo <= hi on field '" + field + "'");
  GroupPredicate p;
  p.kind = Kind::Interval;
  p.field = std::move(field);
  p.lo = lo;
  p.hi = hi;
  return p;
}

GroupPredicate GroupPredicate::indicator(std::string field) {
  GroupPredicate p;
  p.kind = Kind::Indicator;
  p.field = std::move(field);
  return p;
}

bool GroupPredicate::contains(const Covariate& x) const {
  if (kind == Kind::All) return true;
  const auto v = x.get(field);
  if (!v) throw ConfigError("covariate field '" + field + "' not present");
  if (kind == Kind::Interval) return *v >= lo && *v <= hi;
  return *v == 1.0;
}

GroupFamily::GroupFamily(std::vector<Group> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw ConfigError("group family must contain at least one group");
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (groups_[i].name == groups_[j].name) {
        throw ConfigError("duplicate group name '" + groups_[i].name + "'");
      }
    }
  }
}

std::vector<std::string> GroupFamily::names() const {
  std::vector<std::string> out;
  out.reserve(groups_.size());
  for (const auto& g : groups_) out.push_back(g.name);
  return out;
}

MembershipMatrix GroupFamily::membership(const OutcomeSequence& seq) const {
  MembershipMatrix m(seq.size(), groups_.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const Covariate x = seq.covariate(t);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      m.at(t, g) = groups_[g].predicate.contains(x) ? 1 : 0;
    }
  }
  return m;
}

olo::ActivityVector active_groups(const Covariate& x, const GroupFamily& family) {
  olo::ActivityVector a(family.size(), 0);
  for (std::size_t g = 0; g < family.size(); ++g) {
    a[g] = family.groups()[g].predicate.contains(x) ? 1 : 0;
  }
  return a;
}

double effective_propensity(std::span<const double> dist, std::span<const double> group_propensities) {
  if (dist.size() != group_propensities.size()) throw ConfigError("distribution/propensity size mismatch");
  double p = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] != 0.0) p += dist[i] * group_propensities[i];
  }
  return p;
}

double mgate_gradient(double y_obs, int z, double p_eff, double p_group) {
  require_interior(p_eff, "mgate_gradient");
  require_interior(p_group, "mgate_gradient");
  const double scale = y_obs * y_obs * inverse_assignment_weight(z, p_eff);
  if (z == 1) return -scale / (p_group * p_group);
  const double q = 1.0 - p_group;
  return scale / (q * q);
}

double mgate_loss(double y_obs, int z, double p_eff, double p_group) {
  require_interior(p_eff, "mgate_loss");
  require_interior(p_group, "mgate_loss");
  const double scale = y_obs * y_obs * inverse_assignment_weight(z, p_eff);
  return scale * (z == 1 ? 1.0 / p_group : 1.0 / (1.0 - p_group));
}

Mgate::Mgate(GroupFamily family, double c, ClippingFunction h, double fallback_propensity)
    : family_(std::move(family)),
      two_c2_(2.0 * c * c),
      h_(std::move(h)),
      fallback_(fallback_propensity),
      state_(family_.size()) {
  if (!(c > 0.0)) throw ConfigError("strong-convexity constant c must be positive");
  require_interior(fallback_, "MGATE fallback");
}

double Mgate::propose(const Covariate* x) {
  if (x == nullptr) throw ConfigError("MGATE needs covariates every round");
  return propose_active(active_groups(*x, family_));
}

double Mgate::propose_active(std::span<const std::uint8_t> active) {
  if (active.size() != family_.size()) throw ConfigError("activity vector has wrong dimension");
  round_.active.assign(active.begin(), active.end());
  if (!any_active(active)) {
    round_.skipped = true;
    round_.distribution.assign(active.size(), 0.0);
    round_.p_eff = fallback_;
    return fallback_;
  }
  round_.skipped = false;
  for (std::size_t g = 0; g < active.size(); ++g) state_.group_count[g] += active[g];
  round_.distribution = olo::se_normalize(active, state_.weights);
  round_.p_eff = effective_propensity(round_.distribution, state_.group_propensity);
  return round_.p_eff;
}

void Mgate::observe(int z, double y_obs) {
  if (round_.skipped) return;
  const std::size_t d = family_.size();
  const double p_eff = round_.p_eff;
  std::vector<double> loss(d, 0.0);
  for (std::size_t g = 0; g < d; ++g) {
    if (!round_.active[g]) continue;
    double& p = state_.group_propensity[g];
    const double grad = mgate_gradient(y_obs, z, p_eff, p);
    loss[g] = mgate_loss(y_obs, z, p_eff, p);
    // The step lands on the group's next activation, whose count is n + 1.
    const double next = static_cast<double>(state_.group_count[g] + 1);
    const double delta = 1.0 / h_(next);
    p = std::clamp(p - grad / (two_c2_ * next), delta, 1.0 - delta);
  }
  olo::solo_ingest(state_.solo, olo::se_surrogate_loss(round_.active, loss, round_.distribution));
  state_.weights = olo::solo_weights(state_.solo);
}

MultigroupDesign::MultigroupDesign(GroupFamily family, const FirstOrderFactory& base,
                                   std::unique_ptr<olo::SleepingExperts> aggregator,
                                   double fallback_propensity)
    : family_(std::move(family)),
      aggregator_(std::move(aggregator)),
      fallback_(fallback_propensity),
      group_p_(family_.size(), 0.5) {
  if (!aggregator_ || aggregator_->dimension() != family_.size()) {
    throw ConfigError("aggregator dimension must match the number of groups");
  }
  if (!base) throw ConfigError("base design factory is empty");
  require_interior(fallback_, "multigroup fallback");
  copies_.reserve(family_.size());
  for (std::size_t g = 0; g < family_.size(); ++g) copies_.push_back(base());
}

double MultigroupDesign::propose(const Covariate* x) {
  if (x == nullptr) throw ConfigError("multigroup design needs covariates every round");
  return propose_active(active_groups(*x, family_));
}

double MultigroupDesign::propose_active(std::span<const std::uint8_t> active) {
  if (active.size() != family_.size()) throw ConfigError("activity vector has wrong dimension");
  round_.active.assign(active.begin(), active.end());
  if (!any_active(active)) {
    round_.skipped = true;
    round_.distribution.assign(active.size(), 0.0);
    round_.p_eff = fallback_;
    return fallback_;
  }
  round_.skipped = false;
  for (std::size_t g = 0; g < active.size(); ++g) {
    if (active[g]) group_p_[g] = copies_[g]->propose();
  }
  round_.distribution = aggregator_->distribute(active);
  round_.p_eff = effective_propensity(round_.distribution, group_p_);
  return round_.p_eff;
}

void MultigroupDesign::observe(int z, double y_obs) {
  if (round_.skipped) return;
  std::vector<double> loss(family_.size(), 0.0);
  for (std::size_t g = 0; g < family_.size(); ++g) {
    if (!round_.active[g]) continue;
    loss[g] = mgate_loss(y_obs, z, round_.p_eff, group_p_[g]);
    copies_[g]->feedback(mgate_gradient(y_obs, z, round_.p_eff, group_p_[g]));
  }
  aggregator_->feedback(loss);
}

std::unique_ptr<Mgate> mgate_design(GroupFamily family, double c, ClippingFunction h) {
  return std::make_unique<Mgate>(std::move(family), c, std::move(h));
}

}  // namespace ate
