#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/detection.hpp"
#include "intend/eval.hpp"
#include "intend/reasoning.hpp"

// The run orchestrator: one resolved configuration in, one run directory out
// (detections.jsonl, findings.jsonl, traces/, report.json, config.json).
// Precedence when resolving: CLI flags > environment > config file > defaults.
// The frozen config.json is itself a loadable config, which is what makes
// mock-backed runs replayable.

namespace intend::pipeline {

struct RunConfig {
  std::string corpus_path;
  corpus::SchemaMode schema_mode = corpus::SchemaMode::Substring;

  bool do_detect = true;
  bool do_reason = true;
  detection::Method method = detection::Method::SixW;
  int hop_count = 3;
  bool swap_witnesses = false;
  bool absent_counts_as_incongruent = false;

  double align_threshold = 0.5;
  reasoning::GroundingConfig grounding;

  std::string backend_kind = "mock";  // "mock" | "http"
  std::string mock_script_path;
  std::string api_url;
  std::string api_key;  // never serialized
  backend::GenerationConfig generation;
  int max_in_flight = 4;

  std::string out_dir;
};

// Flat "key = value" config file (toml subset: comments with '#', one level
// of [section] headers that prefix keys as "section.key"); files ending in
// .json are parsed as a JSON object with the same keys.
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

// Applies recognized keys onto a config; unknown keys raise ConfigError.
void apply_config_entries(RunConfig& config,
                          const std::map<std::string, std::string>& entries);

// INTEND_API_URL / INTEND_API_KEY.
void apply_environment(RunConfig& config);

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json_file(const std::filesystem::path& path);

std::unique_ptr<backend::Backend> make_backend(const RunConfig& config);

// Detection over a whole corpus through batch_complete; per-pair backend
// failures become undecidable rows instead of aborting the run.
std::vector<detection::DetectionRow> detect_corpus(const corpus::Corpus& data,
                                                   const RunConfig& config,
                                                   backend::Backend& backend);

// Multi-hop reasoning over a whole corpus, pairs processed concurrently up to
// max_in_flight, hops within a pair strictly sequential. When trace_dir is
// given, one JSON per pair with the full prompts and responses is written.
std::vector<eval::PairFindings> reason_corpus(
    const corpus::Corpus& data, const RunConfig& config, backend::Backend& backend,
    const std::optional<std::filesystem::path>& trace_dir);

struct RunResult {
  std::filesystem::path run_dir;
  eval::EvalReport report;
  // Filled when the backend was the scripted mock.
  std::vector<backend::MockBackend::LogEntry> request_log;
};

// Executes detect and/or reason over the corpus, then evaluate, and writes
// all artifacts into config.out_dir. Throws ConfigError / DataError /
// BackendError by failure class.
RunResult run_pipeline(const RunConfig& config);

}  // namespace intend::pipeline
