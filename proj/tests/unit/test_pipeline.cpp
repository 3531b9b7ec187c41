#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/errors.hpp"
#include "intend/pipeline.hpp"
#include "intend/synth.hpp"
#include "../support/test_util.hpp"

using namespace intend;

namespace {

std::atomic<int> g_pipeline_probe_hits{0};
void pipeline_probe(const std::string&) { ++g_pipeline_probe_hits; }

// Writes a generated corpus + script into dir and returns a ready RunConfig.
pipeline::RunConfig prepared_run(const testutil::TempDir& dir, int n_pairs,
                                 std::uint64_t seed, const std::string& out_name) {
  const auto generated = synth::generate(n_pairs, 0.5, seed);
  corpus::write_corpus(generated.corpus, dir.path() / "corpus.jsonl");
  generated.mock_script.write(dir.path() / "mock.jsonl");

  pipeline::RunConfig config;
  config.corpus_path = (dir.path() / "corpus.jsonl").string();
  config.backend_kind = "mock";
  config.mock_script_path = (dir.path() / "mock.jsonl").string();
  config.out_dir = (dir.path() / out_name).string();
  return config;
}

}  // namespace

TEST_CASE("flat config files parse with sections, comments, and quotes") {
  testutil::TempDir dir("config");
  {
    std::ofstream out(dir.path() / "run.cfg");
    out << "# a comment\n"
           "corpus = \"data/corpus.jsonl\"\n"
           "hops = 2\n"
           "swap_witnesses = true\n"
           "\n"
           "[backend]\n"
           "backend = mock\n"
           "mock_script = 'mock.jsonl'\n"
           "temperature = 0.25\n"
           "max_retries = 5\n";
  }
  pipeline::RunConfig config;
  pipeline::apply_config_entries(config, pipeline::load_config_file(dir.path() / "run.cfg"));
  CHECK(config.corpus_path == "data/corpus.jsonl");
  CHECK(config.hop_count == 2);
  CHECK(config.swap_witnesses);
  CHECK(config.backend_kind == "mock");
  CHECK(config.mock_script_path == "mock.jsonl");
  CHECK(config.generation.temperature == 0.25);
  CHECK(config.generation.max_retries == 5);
}

TEST_CASE("json config files use the same keys") {
  testutil::TempDir dir("config-json");
  {
    std::ofstream out(dir.path() / "run.json");
    out << R"({"corpus":"c.jsonl","backend":"mock","mock_script":"m.jsonl",)"
           R"("hops":1,"method":"question","top_p":0.7,"do_detect":false})";
  }
  pipeline::RunConfig config;
  pipeline::apply_config_entries(config, pipeline::load_config_file(dir.path() / "run.json"));
  CHECK(config.corpus_path == "c.jsonl");
  CHECK(config.hop_count == 1);
  CHECK(config.method == detection::Method::QuestionPrompt);
  CHECK(config.generation.top_p == 0.7);
  CHECK_FALSE(config.do_detect);
}

TEST_CASE("unknown config keys and bad values are config errors") {
  testutil::TempDir dir("config-bad");
  {
    std::ofstream out(dir.path() / "bad.cfg");
    out << "corpsu = typo.jsonl\n";
  }
  pipeline::RunConfig config;
  CHECK_THROWS_AS(
      pipeline::apply_config_entries(config, pipeline::load_config_file(dir.path() / "bad.cfg")),
      ConfigError);
  CHECK_THROWS_AS(pipeline::apply_config_entries(config, {{"hops", "many"}}), ConfigError);
  CHECK_THROWS_AS(pipeline::apply_config_entries(config, {{"backend", "carrier-pigeon"}}),
                  ConfigError);
  CHECK_THROWS_AS(pipeline::load_config_file(dir.path() / "missing.cfg"), ConfigError);
}

TEST_CASE("environment supplies endpoint credentials") {
  ::setenv("INTEND_API_URL", "http://example.invalid/v1/chat", 1);
  ::setenv("INTEND_API_KEY", "sk-env", 1);
  pipeline::RunConfig config;
  pipeline::apply_environment(config);
  CHECK(config.api_url == "http://example.invalid/v1/chat");
  CHECK(config.api_key == "sk-env");
  ::unsetenv("INTEND_API_URL");
  ::unsetenv("INTEND_API_KEY");
}

TEST_CASE("the frozen run config reloads to an equivalent run") {
  testutil::TempDir dir("config-freeze");
  auto config = prepared_run(dir, 6, 42, "run");
  config.hop_count = 2;
  config.align_threshold = 0.75;
  {
    std::ofstream out(dir.path() / "frozen.json");
    out << pipeline::config_to_json(config) << "\n";
  }
  const auto reloaded = pipeline::config_from_json_file(dir.path() / "frozen.json");
  CHECK(reloaded.corpus_path == config.corpus_path);
  CHECK(reloaded.hop_count == 2);
  CHECK(reloaded.align_threshold == 0.75);
  CHECK(reloaded.backend_kind == "mock");
  CHECK(pipeline::config_to_json(reloaded) == pipeline::config_to_json(config));
}

TEST_CASE("api keys never land in the frozen config") {
  pipeline::RunConfig config;
  config.api_key = "sk-very-secret";
  CHECK(pipeline::config_to_json(config).find("sk-very-secret") == std::string::npos);
}

TEST_CASE("a full mock run writes the five artifacts and exits cleanly") {
  testutil::TempDir dir("run-full");
  const auto config = prepared_run(dir, 10, 404, "run");
  const auto result = pipeline::run_pipeline(config);

  CHECK(std::filesystem::exists(result.run_dir / "config.json"));
  CHECK(std::filesystem::exists(result.run_dir / "detections.jsonl"));
  CHECK(std::filesystem::exists(result.run_dir / "findings.jsonl"));
  CHECK(std::filesystem::exists(result.run_dir / "report.json"));
  CHECK(std::filesystem::is_directory(result.run_dir / "traces"));

  std::size_t trace_count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(result.run_dir / "traces")) {
    (void)entry;
    ++trace_count;
  }
  CHECK(trace_count == 10);
  CHECK(result.report.binary.f1 == 1.0);
  CHECK_FALSE(result.request_log.empty());
}

TEST_CASE("pipeline failure classes map to their error types") {
  pipeline::RunConfig config;
  config.out_dir = "/tmp/never-used";
  CHECK_THROWS_AS(pipeline::run_pipeline(config), ConfigError);  // no corpus

  config.corpus_path = "/nonexistent/corpus.jsonl";
  CHECK_THROWS_AS(pipeline::run_pipeline(config), ConfigError);

  testutil::TempDir dir("run-badmock");
  auto ok = prepared_run(dir, 4, 1, "run");
  ok.mock_script_path.clear();
  CHECK_THROWS_AS(pipeline::run_pipeline(ok), ConfigError);

  auto bad_hops = prepared_run(dir, 4, 1, "run2");
  bad_hops.hop_count = 9;
  CHECK_THROWS_AS(pipeline::run_pipeline(bad_hops), ConfigError);
}

TEST_CASE("mock-backed runs are replay-deterministic and offline") {
  g_pipeline_probe_hits = 0;
  backend::set_network_probe(pipeline_probe);

  testutil::TempDir dir("run-replay");
  auto config = prepared_run(dir, 12, 777, "run-a");
  const auto first = pipeline::run_pipeline(config);

  // Replay from the frozen config, exactly as a user would.
  auto replay = pipeline::config_from_json_file(first.run_dir / "config.json");
  replay.out_dir = (dir.path() / "run-b").string();
  const auto second = pipeline::run_pipeline(replay);

  CHECK(testutil::slurp(first.run_dir / "report.json") ==
        testutil::slurp(second.run_dir / "report.json"));
  CHECK(testutil::slurp(first.run_dir / "detections.jsonl") ==
        testutil::slurp(second.run_dir / "detections.jsonl"));
  CHECK(testutil::slurp(first.run_dir / "findings.jsonl") ==
        testutil::slurp(second.run_dir / "findings.jsonl"));

  CHECK(g_pipeline_probe_hits.load() == 0);  // no network on mock runs
  backend::set_network_probe(nullptr);
}

TEST_CASE("an http-backed detection run flows through the same pipeline") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    std::string filled;
    for (const auto aspect : prompting::kAspects) {
      if (!filled.empty()) filled += "\\n";
      filled += prompting::sixw_statement(aspect, "agrees with");
    }
    res.set_content("{\"choices\":[{\"message\":{\"content\":\"" + filled + "\"}}]}",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  testutil::TempDir dir("run-http");
  const auto generated = synth::generate(4, 0.5, 91);
  corpus::write_corpus(generated.corpus, dir.path() / "corpus.jsonl");

  pipeline::RunConfig config;
  config.corpus_path = (dir.path() / "corpus.jsonl").string();
  config.backend_kind = "http";
  config.api_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.do_reason = false;
  config.out_dir = (dir.path() / "run").string();
  const auto result = pipeline::run_pipeline(config);

  server.stop();
  server_thread.join();

  const auto rows = detection::load_detections(result.run_dir / "detections.jsonl");
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.pred == 0);  // the stub always answers all-agrees
    CHECK(row.parse_status == "full");
  }
  CHECK(std::filesystem::exists(result.run_dir / "report.json"));
  CHECK_FALSE(std::filesystem::exists(result.run_dir / "findings.jsonl"));
}

TEST_CASE("per-pair backend failures become undecidable rows, not aborts") {
  testutil::TempDir dir("run-partial");
  const auto generated = synth::generate(6, 0.5, 31);
  corpus::write_corpus(generated.corpus, dir.path() / "corpus.jsonl");
  // A script that only answers for the first pair and has no default.
  backend::MockScript script;
  for (const auto& rule : generated.mock_script.rules) {
    if (rule.pair_id == generated.corpus.pairs[0].pair_id) script.rules.push_back(rule);
  }
  script.write(dir.path() / "partial.jsonl");

  pipeline::RunConfig config;
  config.corpus_path = (dir.path() / "corpus.jsonl").string();
  config.backend_kind = "mock";
  config.mock_script_path = (dir.path() / "partial.jsonl").string();
  config.out_dir = (dir.path() / "run").string();
  const auto result = pipeline::run_pipeline(config);

  const auto detections = detection::load_detections(result.run_dir / "detections.jsonl");
  REQUIRE(detections.size() == 6);
  int undecidable = 0;
  for (const auto& row : detections) {
    if (row.undecidable) ++undecidable;
  }
  CHECK(undecidable == 5);

  const auto findings = eval::load_findings(result.run_dir / "findings.jsonl");
  REQUIRE(findings.size() == 6);
  int errored = 0;
  for (const auto& row : findings) {
    if (row.error.has_value()) ++errored;
  }
  CHECK(errored == 5);
}
