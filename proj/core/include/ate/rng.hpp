#pragma once

#include <cstdint>
#include <random>

namespace ate {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replication `rep` under `master`. Depends only on the pair, so a
/// replication's stream does not change with the replication count or the
/// order in which replications execute.
///   seed(master, rep) = mix64(mix64(master) ^ (rep + 1))
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep) {
  return mix64(mix64(master) ^ (rep + 1));
}

/// One explicit seeded stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean, double sd) {
    std::normal_distribution<double> dist(mean, sd);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ate
