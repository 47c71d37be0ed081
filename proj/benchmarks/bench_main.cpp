#include <benchmark/benchmark.h>

#include "ate/data.hpp"
#include "ate/designs.hpp"
#include "ate/multigroup.hpp"
#include "ate/regret.hpp"

namespace {

ate::OutcomeSequence gaussian(std::int64_t T) {
  ate::data::GaussianSpec spec;
  spec.T = T;
  spec.seed = 1;
  return ate::data::gen_gaussian(spec);
}

void BM_ClipOgdRound(benchmark::State& state) {
  ate::ClipOgd design(ate::schedule_sc(1.0));
  ate::Rng rng(3);
  for (auto _ : state) {
    const double p = design.propose();
    const int z = rng.bernoulli(p) ? 1 : 0;
    design.feedback(ate::gradient_estimate(z ? 2.0 : 1.0, z, p));
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_ClipOgdRound);

void BM_MgateRound(benchmark::State& state) {
  const auto groups = static_cast<std::size_t>(state.range(0));
  std::vector<ate::Group> family;
  for (std::size_t g = 0; g < groups; ++g) family.push_back({"g" + std::to_string(g), ate::GroupPredicate::all()});
  ate::Mgate design(ate::GroupFamily(family), 1.0);
  const ate::olo::ActivityVector active(groups, 1);
  ate::Rng rng(5);
  for (auto _ : state) {
    const double p = design.propose_active(active);
    const int z = rng.bernoulli(p) ? 1 : 0;
    design.observe(z, z ? 2.0 : 1.0);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_MgateRound)->Arg(1)->Arg(3)->Arg(10);

void BM_RunDesign(benchmark::State& state) {
  const auto seq = gaussian(state.range(0));
  for (auto _ : state) {
    auto design = ate::clip_ogd_sc(0.5);
    ate::Rng rng(7);
    benchmark::DoNotOptimize(ate::run_design(*design, seq, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunDesign)->Arg(20000);

void BM_NeymanRegret(benchmark::State& state) {
  const auto seq = gaussian(state.range(0));
  auto design = ate::clip_ogd_sc(0.5);
  ate::Rng rng(7);
  const auto traj = ate::run_design(*design, seq, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ate::evaluation::neyman_regret(traj, seq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NeymanRegret)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
