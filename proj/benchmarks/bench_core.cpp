#include <benchmark/benchmark.h>

#include "hypflow/green.hpp"
#include "hypflow/measures.hpp"
#include "hypflow/rng.hpp"
#include "hypflow/walk.hpp"

using namespace hypflow;

namespace {

const GroupModel& f2() {
  static const GroupModel m = GroupModel::free_group(2);
  return m;
}
const StepDistribution& srw() {
  static const StepDistribution mu = StepDistribution::uniform(f2());
  return mu;
}

void BM_WordMultiply(benchmark::State& state) {
  StreamRng rng(1, 0);
  std::vector<Word> words;
  for (int i = 0; i < 64; ++i) {
    std::vector<Letter> letters;
    for (int j = 0; j < 32; ++j) letters.push_back(static_cast<Letter>(rng.below(4)));
    words.push_back(f2().reduce(letters));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f2().multiply(words[i % 64], words[(i + 7) % 64]));
    ++i;
  }
}
BENCHMARK(BM_WordMultiply);

void BM_WalkerSteps(benchmark::State& state) {
  StreamRng rng(2, 0);
  FreeWalker walker(f2(), Word{});
  const int tgt = walker.add_target(extend_ray(f2(), Word{{0}}, 19));
  for (auto _ : state) {
    walker.step(srw().sample(rng));
    benchmark::DoNotOptimize(walker.distance(tgt));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WalkerSteps);

void BM_FirstPassageMc(benchmark::State& state) {
  const Word y = extend_ray(f2(), Word{{0}}, 1);
  McParams mc{static_cast<std::uint64_t>(state.range(0)), 500, 3, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        first_passage(f2(), srw(), Word{}, y, Method::MonteCarlo, mc));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FirstPassageMc)->Arg(10000)->Arg(100000);

void BM_QhatWindow(benchmark::State& state) {
  const Rectangle rect =
      Rectangle::of_cylinders(f2().parse_word("a"), f2().parse_word("b"));
  QhatParams params;
  params.replicas = 5000;
  params.halfwidth = 128;
  params.origin_radius = 3;
  params.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qhat_mass(f2(), srw(), rect, params));
    params.seed += 1;
  }
}
BENCHMARK(BM_QhatWindow);

}  // namespace

BENCHMARK_MAIN();
