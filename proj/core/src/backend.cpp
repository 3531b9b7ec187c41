#include "intend/backend.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "intend/errors.hpp"
#include "intend/text.hpp"

namespace intend::backend {

using nlohmann::json;

namespace {

std::atomic<NetworkProbe> g_network_probe{nullptr};

class LimitGuard {
 public:
  LimitGuard(std::mutex& m, std::condition_variable& cv, int& capacity, int& in_use)
      : mutex_(m), cv_(cv), capacity_(capacity), in_use_(in_use) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return capacity_ == 0 || in_use_ < capacity_; });
    ++in_use_;
  }
  ~LimitGuard() {
    {
      std::lock_guard lock(mutex_);
      --in_use_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex& mutex_;
  std::condition_variable& cv_;
  int& capacity_;
  int& in_use_;
};

}  // namespace

void set_network_probe(NetworkProbe probe) { g_network_probe.store(probe); }

void Backend::set_max_in_flight(int n) {
  std::lock_guard lock(limit_mutex_);
  limit_capacity_ = n < 0 ? 0 : n;
}

CompletionRecord Backend::complete(const prompting::PromptBundle& prompt,
                                   const GenerationConfig& config) {
  LimitGuard guard(limit_mutex_, limit_cv_, limit_capacity_, limit_in_use_);
  return complete_impl(prompt, config);
}

std::vector<CompletionOutcome> Backend::batch_complete(
    const std::vector<prompting::PromptBundle>& prompts,
    const GenerationConfig& config, int max_in_flight) {
  if (max_in_flight < 1) {
    throw ConfigError("max_in_flight must be at least 1, got " +
                      std::to_string(max_in_flight));
  }
  std::vector<CompletionOutcome> results(prompts.size());
  if (prompts.empty()) return results;

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      try {
        results[i].record = complete(prompts[i], config);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), prompts.size());
  if (n_workers == 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

// ---- Mock ------------------------------------------------------------------

MockScript MockScript::parse(std::istream& in, std::string_view source_name) {
  MockScript script;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed mock script line: " + e.what());
    }
    if (j.contains("default")) {
      script.default_response = j.at("default").get<std::string>();
      continue;
    }
    MockRule rule;
    if (const auto m = j.find("match"); m != j.end() && m->is_object()) {
      if (m->contains("template")) rule.template_name = m->at("template").get<std::string>();
      if (m->contains("pair_id")) rule.pair_id = m->at("pair_id").get<std::string>();
      if (m->contains("contains")) rule.contains = m->at("contains").get<std::string>();
    }
    if (!j.contains("response") || !j.at("response").is_string()) {
      throw DataError(where + ": mock rule is missing a string \"response\"");
    }
    rule.response = j.at("response").get<std::string>();
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mock script: " + path.string());
  return parse(in, path.string());
}

void MockScript::write(std::ostream& out) const {
  for (const auto& rule : rules) {
    json match = json::object();
    if (rule.template_name) match["template"] = *rule.template_name;
    if (rule.pair_id) match["pair_id"] = *rule.pair_id;
    if (rule.contains) match["contains"] = *rule.contains;
    out << json{{"match", match}, {"response", rule.response}}.dump() << "\n";
  }
  if (default_response) {
    out << json{{"default", *default_response}}.dump() << "\n";
  }
}

void MockScript::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path.string());
  write(out);
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {}

CompletionRecord MockBackend::complete_impl(const prompting::PromptBundle& prompt,
                                            const GenerationConfig& config) {
  (void)config;  // the mock ignores sampling settings for reproducibility
  const std::string tmpl(prompting::template_name(prompt.template_id));
  {
    std::lock_guard lock(log_mutex_);
    log_.push_back({tmpl, prompt.subject_id});
  }
  // Template names match case-insensitively ("Hop1" and "hop1" coincide).
  const auto same_template = [&tmpl](const std::string& name) {
    return name.size() == tmpl.size() && text::find_icase(tmpl, name) == 0;
  };
  const MockRule* hit = nullptr;
  for (const auto& rule : script_.rules) {
    if (rule.template_name && !same_template(*rule.template_name)) continue;
    if (rule.pair_id && *rule.pair_id != prompt.subject_id) continue;
    if (rule.contains && prompt.user_text.find(*rule.contains) == std::string::npos) {
      continue;
    }
    hit = &rule;
    break;
  }
  CompletionRecord record;
  record.request_prompt = prompt;
  record.attempt_count = 1;
  record.backend_id = id();
  if (hit != nullptr) {
    record.response_text = hit->response;
  } else if (script_.default_response) {
    record.response_text = *script_.default_response;
  } else {
    throw BackendError("no mock rule matched template \"" + tmpl + "\" pair \"" +
                       prompt.subject_id + "\" and the script has no default");
  }
  return record;
}

std::vector<MockBackend::LogEntry> MockBackend::request_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

void MockBackend::clear_log() {
  std::lock_guard lock(log_mutex_);
  log_.clear();
}

// ---- HTTP --------------------------------------------------------------------

HttpOptions http_options_from_env() {
  HttpOptions options;
  if (const char* url = std::getenv("INTEND_API_URL")) options.url = url;
  if (const char* key = std::getenv("INTEND_API_KEY")) options.api_key = key;
  return options;
}

namespace {

struct UrlParts {
  std::string base;  // scheme://authority
  std::string path;  // starts with '/'
};

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) {
  return status == 429 || status >= 500;
}

}  // namespace

struct HttpBackend::Impl {
  HttpOptions options;
  UrlParts url;
};

HttpBackend::HttpBackend(HttpOptions options) : impl_(std::make_unique<Impl>()) {
  if (options.url.empty()) {
    throw ConfigError("HTTP backend requires an endpoint URL "
                      "(set INTEND_API_URL or the api_url config key)");
  }
  impl_->url = split_url(options.url);
  impl_->options = std::move(options);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const { return "http:" + impl_->options.url; }

CompletionRecord HttpBackend::complete_impl(const prompting::PromptBundle& prompt,
                                            const GenerationConfig& config) {
  json messages = json::array();
  if (!prompt.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", prompt.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt.user_text}});
  const json body{{"model", config.model_name},
                  {"messages", messages},
                  {"temperature", config.temperature},
                  {"top_p", config.top_p},
                  {"max_tokens", config.max_new_tokens}};
  const std::string payload = body.dump();

  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  const int max_attempts = 1 + std::max(0, config.max_retries);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (const auto probe = g_network_probe.load()) probe(impl_->options.url);

    httplib::Client client(impl_->url.base);
    const auto seconds = config.timeout.count() / 1000;
    const auto micros = (config.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (!impl_->options.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->options.api_key);
    }

    const auto result =
        client.Post(impl_->url.path, headers, payload, "application/json");
    if (!result) {
      const auto err = result.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             err == httplib::Error::Read ||
                             err == httplib::Error::Write;
      last_error = timed_out ? "request timed out"
                             : "transport error: " + httplib::to_string(err);
    } else if (result->status == 200) {
      CompletionRecord record;
      record.request_prompt = prompt;
      record.attempt_count = attempt;
      record.backend_id = id();
      record.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      try {
        const json reply = json::parse(result->body);
        record.response_text =
            reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
      }
      return record;
    } else if (retryable_status(result->status)) {
      last_error = "server returned status " + std::to_string(result->status);
    } else {
      throw BackendError("endpoint rejected the request with status " +
                         std::to_string(result->status) + " (not retried)");
    }

    if (attempt < max_attempts) {
      const auto backoff =
          std::chrono::milliseconds(50) * (1 << std::min(attempt - 1, 5));
      std::this_thread::sleep_for(std::min(backoff, std::chrono::milliseconds(2000)));
    }
  }
  throw BackendError("completion failed after " + std::to_string(max_attempts) +
                     " attempt(s): " + last_error);
}

}  // namespace intend::backend
