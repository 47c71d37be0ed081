#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ate::olo {

/// 0/1 indicator of which experts are awake this round.
using ActivityVector = std::vector<std::uint8_t>;

/// Scale-free FTRL on the nonnegative orthant with the squared L2
/// regularizer. The argmin has the closed form w = max(0, -L/sqrt(q)).
struct SoloState {
  std::vector<double> cumulative_loss;  // L
  double squared_norm_sum = 0.0;        // q

  explicit SoloState(std::size_t dimension) : cumulative_loss(dimension, 0.0) {}

  std::size_t dimension() const { return cumulative_loss.size(); }
};

/// w_i = max(0, -L_i / sqrt(q)); the zero vector while q == 0.
std::vector<double> solo_weights(const SoloState& state);

/// L += loss, q += ||loss||_2^2. Throws DomainError on non-finite input.
void solo_ingest(SoloState& state, std::span<const double> loss);

/// v_i = a_i w_i / <a, w>. When every active weight is zero the result is
/// uniform over the active coordinates. Throws ConfigError if nothing is
/// active.
std::vector<double> se_normalize(std::span<const std::uint8_t> active, std::span<const double> weights);

/// l~_i = a_i (l_i - <l, v>).
std::vector<double> se_surrogate_loss(std::span<const std::uint8_t> active,
                                      std::span<const double> loss, std::span<const double> dist);

/// Sleeping-experts aggregator interface: a distribution over the awake
/// experts, followed by the round's loss vector.
class SleepingExperts {
 public:
  virtual ~SleepingExperts() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> distribute(std::span<const std::uint8_t> active) = 0;
  /// Loss for the round most recently distributed. Inactive entries are ignored.
  virtual void feedback(std::span<const double> loss) = 0;
};

/// SOLO FTRL behind the sleeping-experts-to-OLO reduction.
class SoloSleepingExperts final : public SleepingExperts {
 public:
  explicit SoloSleepingExperts(std::size_t dimension) : state_(dimension) {}

  std::size_t dimension() const override { return state_.dimension(); }
  std::vector<double> distribute(std::span<const std::uint8_t> active) override;
  void feedback(std::span<const double> loss) override;

  const SoloState& state() const { return state_; }

 private:
  SoloState state_;
  ActivityVector active_;
  std::vector<double> dist_;
};

struct SleepingRound {
  std::vector<double> distribution;
  std::vector<double> surrogate;
};

/// One complete round: weights are fixed before the loss is known.
template <class LossFn>
SleepingRound sleeping_experts_round(SoloState& state, std::span<const std::uint8_t> active,
                                     LossFn&& loss_for) {
  SleepingRound out;
  out.distribution = se_normalize(active, solo_weights(state));
  const std::vector<double> loss = loss_for(std::span<const double>(out.distribution));
  out.surrogate = se_surrogate_loss(active, loss, out.distribution);
  solo_ingest(state, out.surrogate);
  return out;
}

}  // namespace ate::olo
