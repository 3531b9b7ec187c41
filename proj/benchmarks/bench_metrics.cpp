#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "intend/metrics.hpp"

using namespace intend;

namespace {

std::string repeated_text(int sentences) {
  std::string out;
  for (int i = 0; i < sentences; ++i) {
    out += "The man in the grey hoodie forced open the side window near the "
           "bus depot just after midnight, then ran toward the river footbridge. ";
  }
  return out;
}

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
  const std::string text = repeated_text(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::tokenize(text));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(1)->Arg(8)->Arg(64);

static void BM_TokenPrf(benchmark::State& state) {
  const auto pred = metrics::tokenize(repeated_text(4));
  const auto gold = metrics::tokenize(repeated_text(5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::token_prf(pred, gold));
  }
}
BENCHMARK(BM_TokenPrf);

static void BM_Coverage(benchmark::State& state) {
  const std::string host = repeated_text(16);
  const std::string span = "ran toward the river footbridge just after midnight";
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::coverage(span, host));
  }
}
BENCHMARK(BM_Coverage);

static void BM_AlignmentPrf(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<metrics::SpanPair> pred, gold;
  for (int i = 0; i < n; ++i) {
    pred.push_back({"the man wore a grey hoodie variant " + std::to_string(i),
                    "his hands were empty case " + std::to_string(i)});
    gold.push_back({"the man wore a grey hoodie variant " + std::to_string(n - i),
                    "his hands were empty case " + std::to_string(i)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::alignment_prf(pred, gold, 0.5));
  }
}
BENCHMARK(BM_AlignmentPrf)->Arg(2)->Arg(8);
