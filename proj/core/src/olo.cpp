#include "ate/olo.hpp"

#include <cmath>

#include "ate/core.hpp"

namespace ate::olo {

std::vector<double> solo_weights(const SoloState& state) {
  std::vector<double> w(state.dimension(), 0.0);
  if (state.squared_norm_sum <= 0.0) return w;
  const double scale = 1.0 / std::sqrt(state.squared_norm_sum);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(0.0, -state.cumulative_loss[i] * scale);
  }
  return w;
}

void solo_ingest(SoloState& state, std::span<const double> loss) {
  if (loss.size() != state.dimension()) throw ConfigError("loss dimension mismatch");
  double norm2 = 0.0;
  for (double l : loss) {
    if (!std::isfinite(l)) throw DomainError("loss vector must be finite");
    norm2 += l * l;
  }
  for (std::size_t i = 0; i < loss.size(); ++i) state.cumulative_loss[i] += loss[i];
  state.squared_norm_sum += norm2;
}

std::vector<double> se_normalize(std::span<const std::uint8_t> active, std::span<const double> weights) {
  if (active.size() != weights.size()) throw ConfigError("activity/weight dimension mismatch");
  std::vector<double> v(active.size(), 0.0);
  double total = 0.0;
  std::size_t awake = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) {
      total += weights[i];
      ++awake;
    }
  }
  if (awake == 0) throw ConfigError("sleeping-experts round with no active expert");
  if (total > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (active[i]) v[i] = weights[i] / total;
    }
  } else {
    const double u = 1.0 / static_cast<double>(awake);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (active[i]) v[i] = u;
    }
  }
  return v;
}

std::vector<double> se_surrogate_loss(std::span<const std::uint8_t> active,
                                      std::span<const double> loss, std::span<const double> dist) {
  if (active.size() != loss.size() || loss.size() != dist.size()) {
    throw ConfigError("surrogate loss dimension mismatch");
  }
  double expected = 0.0;
  for (std::size_t i = 0; i < loss.size(); ++i) {
    if (dist[i] != 0.0) expected += loss[i] * dist[i];
  }
  std::vector<double> out(loss.size(), 0.0);
  for (std::size_t i = 0; i < loss.size(); ++i) {
    if (active[i]) out[i] = loss[i] - expected;
  }
  return out;
}

std::vector<double> SoloSleepingExperts::distribute(std::span<const std::uint8_t> active) {
  active_.assign(active.begin(), active.end());
  dist_ = se_normalize(active_, solo_weights(state_));
  return dist_;
}

void SoloSleepingExperts::feedback(std::span<const double> loss) {
  if (dist_.empty()) throw ConfigError("feedback before distribute");
  solo_ingest(state_, se_surrogate_loss(active_, loss, dist_));
  dist_.clear();
}

}  // namespace ate::olo
