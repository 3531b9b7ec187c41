#include "intend/pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "intend/errors.hpp"
#include "intend/text.hpp"

namespace intend::pipeline {

using nlohmann::json;

namespace {

std::string strip_quotes(const std::string& value) {
  if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                            (value.front() == '\'' && value.back() == '\''))) {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

}  // namespace

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  std::map<std::string, std::string> entries;
  if (path.extension() == ".json") {
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": malformed config JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path.string() + ": config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_string()) {
        entries[key] = value.get<std::string>();
      } else if (value.is_boolean()) {
        entries[key] = value.get<bool>() ? "true" : "false";
      } else if (value.is_number()) {
        entries[key] = value.dump();
      } else if (!value.is_null()) {
        throw ConfigError(path.string() + ": config key \"" + key +
                          "\" has an unsupported value type");
      }
    }
    return entries;
  }

  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = text::trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    std::string key = text::trim(t.substr(0, eq));
    std::string value = strip_quotes(text::trim(t.substr(eq + 1)));
    if (!section.empty()) key = section + "." + key;
    entries[key] = value;
  }
  return entries;
}

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key \"" + key + "\": expected a boolean, got \"" + value + "\"");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected a number, got \"" + value + "\"");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    return std::stoll(value);
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected an integer, got \"" + value + "\"");
  }
}

}  // namespace

void apply_config_entries(RunConfig& config,
                          const std::map<std::string, std::string>& entries) {
  for (const auto& [raw_key, value] : entries) {
    // Section prefixes are cosmetic; "backend.model" and "model" coincide.
    std::string key = raw_key;
    if (const auto dot = key.rfind('.'); dot != std::string::npos) {
      key = key.substr(dot + 1);
    }
    if (key == "corpus") {
      config.corpus_path = value;
    } else if (key == "schema_mode") {
      config.schema_mode = corpus::parse_schema_mode(value);
    } else if (key == "do_detect") {
      config.do_detect = parse_bool(key, value);
    } else if (key == "do_reason") {
      config.do_reason = parse_bool(key, value);
    } else if (key == "method") {
      config.method = detection::parse_method_name(value);
    } else if (key == "hops") {
      config.hop_count = static_cast<int>(parse_int(key, value));
    } else if (key == "swap_witnesses") {
      config.swap_witnesses = parse_bool(key, value);
    } else if (key == "absent_counts_as_incongruent") {
      config.absent_counts_as_incongruent = parse_bool(key, value);
    } else if (key == "align_threshold") {
      config.align_threshold = parse_double(key, value);
    } else if (key == "min_window_f1") {
      config.grounding.min_window_f1 = parse_double(key, value);
    } else if (key == "window_band") {
      config.grounding.window_band = parse_double(key, value);
    } else if (key == "backend") {
      if (value != "mock" && value != "http") {
        throw ConfigError("config key \"backend\" must be \"mock\" or \"http\"");
      }
      config.backend_kind = value;
    } else if (key == "mock_script") {
      config.mock_script_path = value;
    } else if (key == "api_url") {
      config.api_url = value;
    } else if (key == "model") {
      config.generation.model_name = value;
    } else if (key == "temperature") {
      config.generation.temperature = parse_double(key, value);
    } else if (key == "top_p") {
      config.generation.top_p = parse_double(key, value);
    } else if (key == "max_tokens") {
      config.generation.max_new_tokens = static_cast<int>(parse_int(key, value));
    } else if (key == "timeout_ms") {
      config.generation.timeout = std::chrono::milliseconds(parse_int(key, value));
    } else if (key == "max_retries") {
      config.generation.max_retries = static_cast<int>(parse_int(key, value));
    } else if (key == "max_in_flight") {
      config.max_in_flight = static_cast<int>(parse_int(key, value));
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else {
      throw ConfigError("unknown config key \"" + raw_key + "\"");
    }
  }
}

void apply_environment(RunConfig& config) {
  if (const char* url = std::getenv("INTEND_API_URL")) config.api_url = url;
  if (const char* key = std::getenv("INTEND_API_KEY")) config.api_key = key;
}

std::string config_to_json(const RunConfig& config) {
  const json j{{"corpus", config.corpus_path},
               {"schema_mode", std::string(corpus::schema_mode_name(config.schema_mode))},
               {"do_detect", config.do_detect},
               {"do_reason", config.do_reason},
               {"method", std::string(detection::method_name(config.method))},
               {"hops", config.hop_count},
               {"swap_witnesses", config.swap_witnesses},
               {"absent_counts_as_incongruent", config.absent_counts_as_incongruent},
               {"align_threshold", config.align_threshold},
               {"min_window_f1", config.grounding.min_window_f1},
               {"window_band", config.grounding.window_band},
               {"backend", config.backend_kind},
               {"mock_script", config.mock_script_path},
               {"api_url", config.api_url},
               {"model", config.generation.model_name},
               {"temperature", config.generation.temperature},
               {"top_p", config.generation.top_p},
               {"max_tokens", config.generation.max_new_tokens},
               {"timeout_ms", config.generation.timeout.count()},
               {"max_retries", config.generation.max_retries},
               {"max_in_flight", config.max_in_flight},
               {"out_dir", config.out_dir}};
  return j.dump(2);
}

RunConfig config_from_json_file(const std::filesystem::path& path) {
  RunConfig config;
  apply_config_entries(config, load_config_file(path));
  return config;
}

std::unique_ptr<backend::Backend> make_backend(const RunConfig& config) {
  if (config.backend_kind == "mock") {
    if (config.mock_script_path.empty()) {
      throw ConfigError("backend = mock requires a mock_script path");
    }
    auto b = std::make_unique<backend::MockBackend>(
        backend::MockScript::load(config.mock_script_path));
    b->set_max_in_flight(config.max_in_flight);
    return b;
  }
  if (config.backend_kind == "http") {
    backend::HttpOptions options;
    options.url = config.api_url;
    options.api_key = config.api_key;
    auto b = std::make_unique<backend::HttpBackend>(std::move(options));
    b->set_max_in_flight(config.max_in_flight);
    return b;
  }
  throw ConfigError("unknown backend kind \"" + config.backend_kind + "\"");
}

namespace {

json trace_json(const reasoning::HopTrace& trace) {
  json hops = json::array();
  for (const auto& hop : trace.hops) {
    hops.push_back(
        {{"template", std::string(prompting::template_name(hop.prompt.template_id))},
         {"template_version", hop.prompt.template_version},
         {"system_text", hop.prompt.system_text},
         {"user_text", hop.prompt.user_text},
         {"response", hop.completion.response_text},
         {"attempt_count", hop.completion.attempt_count},
         {"latency_ms", hop.completion.latency.count()},
         {"backend_id", hop.completion.backend_id}});
  }
  return json{{"hop_count", trace.hop_count},
              {"short_circuited", trace.short_circuited},
              {"hops", hops}};
}

}  // namespace

std::vector<detection::DetectionRow> detect_corpus(const corpus::Corpus& data,
                                                   const RunConfig& config,
                                                   backend::Backend& backend) {
  detection::AggregateOptions aggregate;
  aggregate.absent_counts_as_incongruent = config.absent_counts_as_incongruent;

  std::vector<prompting::PromptBundle> prompts;
  prompts.reserve(data.pairs.size());
  for (const auto& pair : data.pairs) {
    corpus::ContextPair prompted = pair;
    if (config.swap_witnesses) {
      std::swap(prompted.answer_a, prompted.answer_b);
    }
    switch (config.method) {
      case detection::Method::SixW:
        prompts.push_back(prompting::build_6w_prompt(prompted));
        break;
      case detection::Method::QuestionPrompt:
        prompts.push_back(prompting::build_question_prompt(prompted));
        break;
      case detection::Method::RegularPrompt:
        prompts.push_back(prompting::build_regular_prompt(prompted));
        break;
    }
  }
  const auto outcomes =
      backend.batch_complete(prompts, config.generation, config.max_in_flight);

  std::vector<detection::DetectionRow> rows;
  rows.reserve(data.pairs.size());
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    detection::DetectionRow row;
    row.pair_id = data.pairs[i].pair_id;
    row.method = std::string(detection::method_name(config.method));
    if (!outcomes[i].ok()) {
      row.pred = 0;
      row.undecidable = true;
      row.parse_status = "failed";
    } else {
      const auto& response = outcomes[i].record->response_text;
      if (config.method == detection::Method::SixW) {
        const auto assessment = detection::parse_6w_response(response);
        row.parse_status =
            std::string(detection::parse_status_name(assessment.parse_status));
        for (const auto& [aspect, label] : assessment.labels) {
          row.aspects[std::string(prompting::aspect_name(aspect))] =
              std::string(prompting::label_short(label));
        }
        if (assessment.parse_status == detection::ParseStatus::Failed) {
          row.pred = 0;
          row.undecidable = true;
        } else {
          row.pred = detection::aggregate_6w(assessment, aggregate);
        }
      } else {
        const auto answer = detection::extract_yes_no(response);
        if (answer) {
          row.pred = *answer;
          row.parse_status = "full";
        } else {
          row.pred = 0;
          row.undecidable = true;
          row.parse_status = "failed";
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<eval::PairFindings> reason_corpus(
    const corpus::Corpus& data, const RunConfig& config, backend::Backend& backend,
    const std::optional<std::filesystem::path>& trace_dir) {
  if (config.hop_count < 1 || config.hop_count > 3) {
    throw ConfigError("hops must be 1, 2, or 3, got " + std::to_string(config.hop_count));
  }
  if (trace_dir) std::filesystem::create_directories(*trace_dir);

  std::vector<eval::PairFindings> rows(data.pairs.size());
  std::vector<json> traces(data.pairs.size());

  reasoning::RunOptions ropts;
  ropts.swap_witnesses = config.swap_witnesses;

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= data.pairs.size()) return;
      const auto& pair = data.pairs[i];
      eval::PairFindings row;
      row.pair_id = pair.pair_id;
      try {
        auto result = reasoning::reason(pair, config.hop_count, backend,
                                        config.generation, config.grounding, ropts);
        row.short_circuited = result.trace.short_circuited;
        row.skipped_blocks = result.skipped_blocks;
        row.findings = std::move(result.findings);
        traces[i] = trace_json(result.trace);
      } catch (const std::exception& e) {
        row.error = e.what();
        traces[i] = json{{"error", e.what()}};
      }
      rows[i] = std::move(row);
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(std::max(1, config.max_in_flight), data.pairs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (trace_dir) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      traces[i]["pair_id"] = data.pairs[i].pair_id;
      std::ofstream trace_out(*trace_dir / (data.pairs[i].pair_id + ".json"));
      trace_out << traces[i].dump(2) << "\n";
    }
  }
  return rows;
}

RunResult run_pipeline(const RunConfig& config) {
  if (config.corpus_path.empty()) throw ConfigError("run config is missing a corpus path");
  if (config.out_dir.empty()) throw ConfigError("run config is missing an out_dir");
  if (!std::filesystem::exists(config.corpus_path)) {
    throw ConfigError("corpus file does not exist: " + config.corpus_path);
  }
  if (config.hop_count < 1 || config.hop_count > 3) {
    throw ConfigError("hops must be 1, 2, or 3");
  }
  if (!config.do_detect && !config.do_reason) {
    throw ConfigError("nothing to run: both do_detect and do_reason are off");
  }

  const auto corpus_data = corpus::load_corpus(config.corpus_path, config.schema_mode);
  auto backend_handle = make_backend(config);

  const std::filesystem::path run_dir(config.out_dir);
  std::filesystem::create_directories(run_dir);

  {
    std::ofstream out(run_dir / "config.json");
    if (!out) throw DataError("cannot write run config: " + (run_dir / "config.json").string());
    out << config_to_json(config) << "\n";
  }

  std::vector<detection::DetectionRow> detection_rows;
  if (config.do_detect) {
    detection_rows = detect_corpus(corpus_data, config, *backend_handle);
    std::ofstream out(run_dir / "detections.jsonl");
    if (!out) throw DataError("cannot write detections.jsonl");
    for (const auto& row : detection_rows) {
      out << detection::row_to_jsonl(row) << "\n";
    }
  }

  std::vector<eval::PairFindings> findings_rows;
  if (config.do_reason) {
    findings_rows = reason_corpus(corpus_data, config, *backend_handle, run_dir / "traces");
    std::ofstream out(run_dir / "findings.jsonl");
    if (!out) throw DataError("cannot write findings.jsonl");
    for (const auto& row : findings_rows) {
      out << eval::pair_findings_to_jsonl(row) << "\n";
    }
  }

  eval::EvalOptions eval_opts;
  eval_opts.align_threshold = config.align_threshold;
  RunResult result;
  result.report = eval::evaluate(detection_rows, findings_rows, corpus_data, eval_opts,
                                 config.do_detect, config.do_reason);
  eval::write_report(result.report, run_dir / "report.json");
  result.run_dir = run_dir;
  if (auto* mock = dynamic_cast<backend::MockBackend*>(backend_handle.get())) {
    result.request_log = mock->request_log();
  }
  return result;
}

}  // namespace intend::pipeline
