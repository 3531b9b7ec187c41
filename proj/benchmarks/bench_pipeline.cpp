#include <benchmark/benchmark.h>

#include "intend/backend.hpp"
#include "intend/eval.hpp"
#include "intend/pipeline.hpp"
#include "intend/synth.hpp"

using namespace intend;

static void BM_SynthGenerate(benchmark::State& state) {
  const int pairs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::generate(pairs, 0.62, 17));
  }
}
BENCHMARK(BM_SynthGenerate)->Arg(10)->Arg(100);

static void BM_ScriptedDetectReasonEvaluate(benchmark::State& state) {
  const int pairs = static_cast<int>(state.range(0));
  const auto generated = synth::generate(pairs, 0.62, 17);
  pipeline::RunConfig config;
  config.max_in_flight = 4;
  for (auto _ : state) {
    backend::MockBackend mock(generated.mock_script);
    const auto detections = pipeline::detect_corpus(generated.corpus, config, mock);
    const auto findings =
        pipeline::reason_corpus(generated.corpus, config, mock, std::nullopt);
    benchmark::DoNotOptimize(eval::evaluate(detections, findings, generated.corpus));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * pairs);
}
BENCHMARK(BM_ScriptedDetectReasonEvaluate)->Arg(10)->Arg(50);

BENCHMARK_MAIN();
