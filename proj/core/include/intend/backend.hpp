#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intend/prompting.hpp"

// Uniform chat-completion interface over a JSON-over-HTTP endpoint and a
// deterministic scripted mock. Generation settings follow the source
// defaults: temperature 0.6, top_p 0.9, up to 512 new tokens.

namespace intend::backend {

struct GenerationConfig {
  double temperature = 0.6;
  double top_p = 0.9;
  int max_new_tokens = 512;
  std::string model_name = "default";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;  // retries after the first attempt
};

struct CompletionRecord {
  prompting::PromptBundle request_prompt;
  std::string response_text;  // exactly what the backend returned, untrimmed
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;
  std::string backend_id;
};

// Per-item result for batch completion; failures carry the error message
// instead of aborting the whole batch.
struct CompletionOutcome {
  std::optional<CompletionRecord> record;
  std::string error;

  bool ok() const { return record.has_value(); }
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Completes one prompt. Throws BackendError on exhausted retries,
  // non-retryable protocol errors, or timeouts.
  CompletionRecord complete(const prompting::PromptBundle& prompt,
                            const GenerationConfig& config);

  // Completes prompts with at most max_in_flight requests outstanding.
  // Results are in input order regardless of completion order.
  std::vector<CompletionOutcome> batch_complete(
      const std::vector<prompting::PromptBundle>& prompts,
      const GenerationConfig& config, int max_in_flight);

  virtual std::string id() const = 0;

  // Caps concurrent complete() calls across all callers of this handle.
  // 0 means unlimited.
  void set_max_in_flight(int n);

 protected:
  virtual CompletionRecord complete_impl(const prompting::PromptBundle& prompt,
                                         const GenerationConfig& config) = 0;

 private:
  std::mutex limit_mutex_;
  std::condition_variable limit_cv_;
  int limit_capacity_ = 0;
  int limit_in_use_ = 0;
};

// ---- Scripted mock -------------------------------------------------------

// One routing rule: all fields optional, missing means wildcard. First
// matching rule wins.
struct MockRule {
  std::optional<std::string> template_name;
  std::optional<std::string> pair_id;
  std::optional<std::string> contains;  // substring of the rendered user text
  std::string response;
};

struct MockScript {
  std::vector<MockRule> rules;
  std::optional<std::string> default_response;

  // JSONL: {"match":{"template":...,"pair_id":...,"contains":...},"response":...}
  // or {"default":...}.
  static MockScript load(const std::filesystem::path& path);
  static MockScript parse(std::istream& in, std::string_view source_name = "<stream>");
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockScript script);

  std::string id() const override { return "mock"; }

  struct LogEntry {
    std::string template_name;
    std::string subject_id;
  };
  std::vector<LogEntry> request_log() const;
  void clear_log();

 protected:
  CompletionRecord complete_impl(const prompting::PromptBundle& prompt,
                                 const GenerationConfig& config) override;

 private:
  MockScript script_;
  mutable std::mutex log_mutex_;
  std::vector<LogEntry> log_;
};

// ---- HTTP ----------------------------------------------------------------

struct HttpOptions {
  std::string url;      // full endpoint URL, e.g. http://host:8080/v1/chat/completions
  std::string api_key;  // sent as a bearer token when non-empty
};

// Reads INTEND_API_URL / INTEND_API_KEY.
HttpOptions http_options_from_env();

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpOptions options);
  ~HttpBackend() override;

  std::string id() const override;

 protected:
  CompletionRecord complete_impl(const prompting::PromptBundle& prompt,
                                 const GenerationConfig& config) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Test seam: invoked with the endpoint URL before every HTTP attempt. Lets
// hermetic tests prove that no network request happens on mock-backed runs.
using NetworkProbe = void (*)(const std::string& url);
void set_network_probe(NetworkProbe probe);

}  // namespace intend::backend
