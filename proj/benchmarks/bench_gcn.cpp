#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "gcn/creativity.hpp"
#include "gcn/curriculum.hpp"
#include "gcn/fixture.hpp"
#include "gcn/generator.hpp"
#include "gcn/wireformat.hpp"

using namespace gcn;

static void BM_GenerateBatch(benchmark::State& state) {
  const auto b = fixture::make(TaskKind::IntentDetection, 1, {20, 1, 1});
  GeneratorConfig cfg;
  cfg.pretrain_steps = 50;
  cfg.sampler.max_new_tokens = 24;
  cfg.workers = static_cast<int>(state.range(1));
  Generator g(make_tiny_backend(b.train, SeparatorSet{}), cfg, SeparatorSet{}, TaskKind::IntentDetection);
  Rng rng(1);
  g.pretrain_on_seed(b.train, rng);
  std::uint64_t stream = 0;
  for (auto _ : state) benchmark::DoNotOptimize(g.generate_batch(static_cast<std::size_t>(state.range(0)),
                                                                  PromptMode::unconditional(), ++stream, 0, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateBatch)->Args({100, 1})->Args({100, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_SelfBleu(benchmark::State& state) {
  const auto b = fixture::make(TaskKind::IntentDetection, 1, {200, 1, 1});
  std::vector<std::string> texts;
  for (const auto& e : b.train.examples) {
    if (texts.size() == static_cast<std::size_t>(state.range(0))) break;
    texts.push_back(e.utterance);
  }
  for (auto _ : state) benchmark::DoNotOptimize(self_bleu(texts));
}
BENCHMARK(BM_SelfBleu)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_AlignIob(benchmark::State& state) {
  const std::string label = "city boston date next monday time late evening";
  const std::string utterance = "i want the flight to boston next monday in the late evening please";
  for (auto _ : state) benchmark::DoNotOptimize(align_iob(label, utterance, {"city", "date", "time"}));
}
BENCHMARK(BM_AlignIob);

static void BM_CurriculumPlan(benchmark::State& state) {
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(plan(i++ % 6, 5, 100, 10));
}
BENCHMARK(BM_CurriculumPlan);

BENCHMARK_MAIN();
