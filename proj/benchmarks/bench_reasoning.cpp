#include <benchmark/benchmark.h>

#include <string>

#include "intend/reasoning.hpp"

using namespace intend;

namespace {

std::string long_host(int sentences) {
  std::string out;
  for (int i = 0; i < sentences; ++i) {
    out += "Sentence " + std::to_string(i) +
           " describes the scene near the old warehouse where the courier "
           "waited by the trash can smoking a cigarette. ";
  }
  return out;
}

}  // namespace

static void BM_GroundSpanExact(benchmark::State& state) {
  const std::string host = long_host(static_cast<int>(state.range(0)));
  const std::string quote = "waited by the trash can smoking a cigarette";
  for (auto _ : state) {
    benchmark::DoNotOptimize(reasoning::ground_span(quote, host));
  }
}
BENCHMARK(BM_GroundSpanExact)->Arg(4)->Arg(32);

static void BM_GroundSpanFuzzy(benchmark::State& state) {
  const std::string host = long_host(static_cast<int>(state.range(0)));
  // Token order differs from the host, defeating both exact routes.
  const std::string quote = "smoking near the trash can the courier waited";
  for (auto _ : state) {
    benchmark::DoNotOptimize(reasoning::ground_span(quote, host));
  }
}
BENCHMARK(BM_GroundSpanFuzzy)->Arg(4)->Arg(32);

static void BM_ParseContradictions(benchmark::State& state) {
  std::vector<reasoning::RawContradiction> findings;
  for (int i = 1; i <= 6; ++i) {
    findings.push_back({i,
                        "quote number " + std::to_string(i) + " from the first account",
                        "quote number " + std::to_string(i) + " from the second account",
                        "contradicts"});
  }
  const std::string response = reasoning::format_contradictions(findings);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reasoning::parse_contradictions(response));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(response.size()));
}
BENCHMARK(BM_ParseContradictions);
