// Command-line entry point wiring all modules: validate / stats / split /
// synth / prompts / detect / reason / evaluate / report / run.
//
// Exit codes: 0 success, 2 configuration error, 3 data or validation error,
// 4 backend error, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/detection.hpp"
#include "intend/errors.hpp"
#include "intend/eval.hpp"
#include "intend/pipeline.hpp"
#include "intend/prompting.hpp"
#include "intend/reasoning.hpp"
#include "intend/synth.hpp"

#ifndef INTEND_VERSION
#define INTEND_VERSION "0.0.0"
#endif

namespace {

using namespace intend;

constexpr int kExitOk = 0;
constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;

corpus::SchemaMode mode_from(const std::string& name) {
  return corpus::parse_schema_mode(name);
}

// Shared backend/run flags. Values are applied onto a RunConfig only when
// the flag was actually passed, so precedence stays CLI > env > file >
// defaults.
struct RunFlags {
  std::string config_path;
  std::string corpus_path;
  std::string mode = "substring";
  std::string backend_kind;
  std::string mock_script;
  std::string api_url;
  std::string model;
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 512;
  std::int64_t timeout_ms = 30000;
  int max_retries = 2;
  int max_in_flight = 4;
  bool swap_witnesses = false;
  bool absent_incongruent = false;
  double align_threshold = 0.5;
  double min_window_f1 = 0.5;
  double window_band = 0.5;

  CLI::Option* opt_mode = nullptr;
  CLI::Option* opt_backend = nullptr;
  CLI::Option* opt_mock_script = nullptr;
  CLI::Option* opt_api_url = nullptr;
  CLI::Option* opt_model = nullptr;
  CLI::Option* opt_temperature = nullptr;
  CLI::Option* opt_top_p = nullptr;
  CLI::Option* opt_max_tokens = nullptr;
  CLI::Option* opt_timeout = nullptr;
  CLI::Option* opt_retries = nullptr;
  CLI::Option* opt_in_flight = nullptr;
  CLI::Option* opt_swap = nullptr;
  CLI::Option* opt_absent = nullptr;
  CLI::Option* opt_align = nullptr;
  CLI::Option* opt_min_window_f1 = nullptr;
  CLI::Option* opt_window_band = nullptr;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_corpus) {
  cmd->add_option("--config", f.config_path, "config file (key = value, or .json)");
  if (with_corpus) {
    cmd->add_option("--corpus", f.corpus_path, "corpus JSONL file")->required();
  }
  f.opt_mode = cmd->add_option("--mode", f.mode, "qa_segments mode: substring|concatenation");
  f.opt_backend = cmd->add_option("--backend", f.backend_kind, "mock|http");
  f.opt_mock_script = cmd->add_option("--mock-script", f.mock_script, "mock script JSONL");
  f.opt_api_url = cmd->add_option("--api-url", f.api_url, "chat-completion endpoint URL");
  f.opt_model = cmd->add_option("--model", f.model, "model name sent to the endpoint");
  f.opt_temperature = cmd->add_option("--temperature", f.temperature, "sampling temperature");
  f.opt_top_p = cmd->add_option("--top-p", f.top_p, "nucleus sampling threshold");
  f.opt_max_tokens = cmd->add_option("--max-tokens", f.max_tokens, "max new tokens");
  f.opt_timeout = cmd->add_option("--timeout-ms", f.timeout_ms, "request timeout");
  f.opt_retries = cmd->add_option("--max-retries", f.max_retries, "retries after the first attempt");
  f.opt_in_flight = cmd->add_option("--max-in-flight", f.max_in_flight, "max concurrent requests");
  f.opt_swap = cmd->add_flag("--swap-witnesses", f.swap_witnesses,
                             "swap the two answers before prompting (order-sensitivity probe)");
  f.opt_absent = cmd->add_flag("--absent-incongruent", f.absent_incongruent,
                               "ablation: count absent-from as incongruent");
  f.opt_align = cmd->add_option("--align-threshold", f.align_threshold,
                                "per-side F1 threshold for alignment true positives");
  f.opt_min_window_f1 = cmd->add_option("--min-window-f1", f.min_window_f1,
                                        "grounding acceptance threshold");
  f.opt_window_band = cmd->add_option("--window-band", f.window_band,
                                      "grounding window length band");
}

pipeline::RunConfig resolve_run_config(const RunFlags& f) {
  pipeline::RunConfig config;
  if (!f.config_path.empty()) {
    pipeline::apply_config_entries(config, pipeline::load_config_file(f.config_path));
  }
  pipeline::apply_environment(config);

  if (!f.corpus_path.empty()) config.corpus_path = f.corpus_path;
  if (f.opt_mode && f.opt_mode->count() > 0) config.schema_mode = mode_from(f.mode);
  if (f.opt_backend && f.opt_backend->count() > 0) config.backend_kind = f.backend_kind;
  if (f.opt_mock_script && f.opt_mock_script->count() > 0) config.mock_script_path = f.mock_script;
  if (f.opt_api_url && f.opt_api_url->count() > 0) config.api_url = f.api_url;
  if (f.opt_model && f.opt_model->count() > 0) config.generation.model_name = f.model;
  if (f.opt_temperature && f.opt_temperature->count() > 0) config.generation.temperature = f.temperature;
  if (f.opt_top_p && f.opt_top_p->count() > 0) config.generation.top_p = f.top_p;
  if (f.opt_max_tokens && f.opt_max_tokens->count() > 0) config.generation.max_new_tokens = f.max_tokens;
  if (f.opt_timeout && f.opt_timeout->count() > 0) {
    config.generation.timeout = std::chrono::milliseconds(f.timeout_ms);
  }
  if (f.opt_retries && f.opt_retries->count() > 0) config.generation.max_retries = f.max_retries;
  if (f.opt_in_flight && f.opt_in_flight->count() > 0) config.max_in_flight = f.max_in_flight;
  if (f.opt_swap && f.opt_swap->count() > 0) config.swap_witnesses = f.swap_witnesses;
  if (f.opt_absent && f.opt_absent->count() > 0) {
    config.absent_counts_as_incongruent = f.absent_incongruent;
  }
  if (f.opt_align && f.opt_align->count() > 0) config.align_threshold = f.align_threshold;
  if (f.opt_min_window_f1 && f.opt_min_window_f1->count() > 0) {
    config.grounding.min_window_f1 = f.min_window_f1;
  }
  if (f.opt_window_band && f.opt_window_band->count() > 0) {
    config.grounding.window_band = f.window_band;
  }
  return config;
}

void print_stats(const corpus::CorpusStats& stats, bool as_json) {
  if (as_json) {
    const nlohmann::json j{{"n_events", stats.n_events},
                           {"n_testimonies", stats.n_testimonies},
                           {"n_unique_contexts", stats.n_unique_contexts},
                           {"n_pairs", stats.n_pairs},
                           {"n_incongruent", stats.n_incongruent},
                           {"n_non_incongruent", stats.n_non_incongruent},
                           {"n_unlabeled", stats.n_unlabeled},
                           {"mean_gold_span_tokens", stats.mean_gold_span_tokens}};
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "events:              " << stats.n_events << "\n"
            << "testimonies:         " << stats.n_testimonies << "\n"
            << "unique contexts:     " << stats.n_unique_contexts << "\n"
            << "pairs:               " << stats.n_pairs << "\n"
            << "incongruent:         " << stats.n_incongruent << "\n"
            << "non-incongruent:     " << stats.n_non_incongruent << "\n"
            << "unlabeled:           " << stats.n_unlabeled << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", stats.mean_gold_span_tokens);
  std::cout << "mean gold span toks: " << buf << "\n";
}

const corpus::ContextPair& find_pair(const corpus::Corpus& data, const std::string& id) {
  for (const auto& pair : data.pairs) {
    if (pair.pair_id == id) return pair;
  }
  throw DataError("pair_id \"" + id + "\" not found in corpus");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Incongruence detection and reasoning toolkit for paired eyewitness testimonies"};

  bool show_version = false;
  app.add_flag("--version", show_version, "print version and template versions");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "parse a corpus and check every invariant");
  std::string validate_file;
  std::string validate_mode = "substring";
  validate_cmd->add_option("file", validate_file, "corpus JSONL")->required();
  validate_cmd->add_option("--mode", validate_mode, "substring|concatenation");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics");
  std::string stats_file;
  std::string stats_mode = "substring";
  bool stats_json = false;
  stats_cmd->add_option("file", stats_file, "corpus JSONL")->required();
  stats_cmd->add_option("--mode", stats_mode, "substring|concatenation");
  stats_cmd->add_flag("--json", stats_json, "machine-readable output");

  // split
  auto* split_cmd = app.add_subcommand("split", "deterministic train/test split");
  std::string split_file, split_mode = "substring", out_train, out_test;
  double split_fraction = 0.65;
  std::uint64_t split_seed = 0;
  bool split_by_event = false;
  split_cmd->add_option("file", split_file, "corpus JSONL")->required();
  split_cmd->add_option("--fraction", split_fraction, "train fraction in (0,1)")->required();
  split_cmd->add_option("--seed", split_seed, "shuffle seed")->required();
  split_cmd->add_option("--out-train", out_train, "train output")->required();
  split_cmd->add_option("--out-test", out_test, "test output")->required();
  split_cmd->add_option("--mode", split_mode, "substring|concatenation");
  split_cmd->add_flag("--by-event", split_by_event, "keep whole events together");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a corpus with planted incongruences");
  int synth_pairs = 0;
  double synth_frac = 0.62;
  std::uint64_t synth_seed = 0;
  std::string synth_corpus, synth_manifest, synth_mock, synth_banks;
  synth_cmd->add_option("--pairs", synth_pairs, "number of context pairs")->required();
  synth_cmd->add_option("--frac", synth_frac, "incongruent fraction");
  synth_cmd->add_option("--seed", synth_seed, "generator seed")->required();
  synth_cmd->add_option("--out-corpus", synth_corpus, "corpus output")->required();
  synth_cmd->add_option("--out-manifest", synth_manifest, "plant manifest output")->required();
  synth_cmd->add_option("--out-mock", synth_mock, "mock script output")->required();
  synth_cmd->add_option("--banks", synth_banks, "word bank overrides (JSON)");

  // prompts
  auto* prompts_cmd = app.add_subcommand("prompts", "inspect prompt templates");
  auto* prompts_list = prompts_cmd->add_subcommand("list", "template ids and versions");
  auto* prompts_dump = prompts_cmd->add_subcommand("dump", "print the exact prompt for a pair");
  std::string dump_template, dump_pair, dump_corpus, dump_mode = "substring";
  std::string dump_carry = "<carried response from the previous hop>";
  prompts_dump->add_option("--template", dump_template, "6w|question|regular|hop1|hop2|hop3")->required();
  prompts_dump->add_option("--pair", dump_pair, "pair_id")->required();
  prompts_dump->add_option("--corpus", dump_corpus, "corpus JSONL")->required();
  prompts_dump->add_option("--mode", dump_mode, "substring|concatenation");
  prompts_dump->add_option("--carry", dump_carry, "carry text for hop2/hop3");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "binary incongruence detection over a corpus");
  RunFlags detect_flags;
  std::string detect_method = "6w";
  std::string detect_out;
  auto* detect_method_opt = detect_cmd->add_option("--method", detect_method, "6w|question|regular");
  detect_cmd->add_option("--out", detect_out, "detections JSONL output")->required();
  add_run_flags(detect_cmd, detect_flags, /*with_corpus=*/true);

  // reason
  auto* reason_cmd = app.add_subcommand("reason", "multi-hop contradiction extraction over a corpus");
  RunFlags reason_flags;
  int reason_hops = 3;
  std::string reason_out, reason_trace_dir;
  auto* reason_hops_opt = reason_cmd->add_option("--hops", reason_hops, "1|2|3");
  reason_cmd->add_option("--out", reason_out, "findings JSONL output")->required();
  reason_cmd->add_option("--trace-dir", reason_trace_dir, "write one JSON trace per pair");
  add_run_flags(reason_cmd, reason_flags, /*with_corpus=*/true);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score detections/findings against a gold corpus");
  std::string eval_gold, eval_detections, eval_findings, eval_out, eval_mode = "substring";
  double eval_align = 0.5;
  eval_cmd->add_option("--gold", eval_gold, "gold corpus JSONL")->required();
  auto* eval_det_opt = eval_cmd->add_option("--detections", eval_detections, "detections JSONL");
  auto* eval_find_opt = eval_cmd->add_option("--findings", eval_findings, "findings JSONL");
  eval_cmd->add_option("--out", eval_out, "report JSON output")->required();
  eval_cmd->add_option("--align-threshold", eval_align, "per-side F1 threshold");
  eval_cmd->add_option("--mode", eval_mode, "substring|concatenation");

  // report
  auto* report_cmd = app.add_subcommand("report", "render a stored report");
  std::string report_file;
  bool report_pretty = false;
  report_cmd->add_option("file", report_file, "report JSON")->required();
  report_cmd->add_flag("--pretty", report_pretty, "render as a table");

  // run
  auto* run_cmd = app.add_subcommand("run", "full pipeline into a run directory");
  RunFlags run_flags;
  std::string run_out_dir, run_method;
  int run_hops = 0;
  bool run_no_detect = false, run_no_reason = false;
  run_cmd->add_option("--out-dir", run_out_dir, "run directory (overrides config)");
  run_cmd->add_option("--method", run_method, "6w|question|regular");
  auto* run_hops_opt = run_cmd->add_option("--hops", run_hops, "1|2|3");
  run_cmd->add_flag("--no-detect", run_no_detect, "skip the detection stage");
  run_cmd->add_flag("--no-reason", run_no_reason, "skip the reasoning stage");
  run_cmd->add_option("--corpus", run_flags.corpus_path, "corpus JSONL");
  add_run_flags(run_cmd, run_flags, /*with_corpus=*/false);

  CLI11_PARSE(app, argc, argv);

  if (show_version) {
    std::cout << "intend " << INTEND_VERSION << "\n";
    for (const auto& info : prompting::list_templates()) {
      std::cout << "  template " << info.name << ": " << info.version << "\n";
    }
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  if (validate_cmd->parsed()) {
    const auto data = corpus::load_corpus(validate_file, mode_from(validate_mode));
    std::cout << "OK: " << data.testimonies.size() << " testimonies, "
              << data.pairs.size() << " pairs, all invariants hold\n";
    return kExitOk;
  }

  if (stats_cmd->parsed()) {
    const auto data = corpus::load_corpus(stats_file, mode_from(stats_mode));
    print_stats(corpus::compute_stats(data), stats_json);
    return kExitOk;
  }

  if (split_cmd->parsed()) {
    const auto data = corpus::load_corpus(split_file, mode_from(split_mode));
    const auto result = corpus::split_corpus(
        data, split_fraction, split_seed,
        split_by_event ? corpus::SplitGranularity::Event : corpus::SplitGranularity::Pair);
    corpus::Corpus train{corpus::referenced_testimonies(data, result.train), result.train};
    corpus::Corpus test{corpus::referenced_testimonies(data, result.test), result.test};
    corpus::write_corpus(train, std::filesystem::path(out_train));
    corpus::write_corpus(test, std::filesystem::path(out_test));
    std::cout << "train: " << result.train.size() << " pairs -> " << out_train << "\n"
              << "test:  " << result.test.size() << " pairs -> " << out_test << "\n";
    return kExitOk;
  }

  if (synth_cmd->parsed()) {
    const auto banks = synth_banks.empty() ? synth::WordBanks::defaults()
                                           : synth::WordBanks::load(synth_banks);
    const auto output = synth::generate(synth_pairs, synth_frac, synth_seed, banks);
    corpus::write_corpus(output.corpus, std::filesystem::path(synth_corpus));
    synth::write_manifest(output.manifest, synth_manifest);
    output.mock_script.write(std::filesystem::path(synth_mock));
    std::cout << "corpus:   " << synth_corpus << " (" << output.corpus.pairs.size()
              << " pairs, " << output.manifest.declared.n_incongruent << " incongruent)\n"
              << "manifest: " << synth_manifest << "\n"
              << "mock:     " << synth_mock << "\n";
    return kExitOk;
  }

  if (prompts_list->parsed()) {
    for (const auto& info : prompting::list_templates()) {
      std::cout << info.name << "\t" << info.version << "\n";
    }
    return kExitOk;
  }

  if (prompts_dump->parsed()) {
    const auto data = corpus::load_corpus(dump_corpus, mode_from(dump_mode));
    const auto& pair = find_pair(data, dump_pair);
    prompting::PromptBundle bundle;
    if (dump_template == "hop1" || dump_template == "hop2" || dump_template == "hop3") {
      const int hop = dump_template.back() - '0';
      bundle = prompting::build_hop_prompt(hop, pair, dump_carry);
    } else {
      const auto id = prompting::parse_template_name(dump_template);
      if (id == prompting::TemplateId::SixW) bundle = prompting::build_6w_prompt(pair);
      if (id == prompting::TemplateId::QuestionPrompt) bundle = prompting::build_question_prompt(pair);
      if (id == prompting::TemplateId::RegularPrompt) bundle = prompting::build_regular_prompt(pair);
    }
    std::cout << "# template " << prompting::template_name(bundle.template_id)
              << " version " << bundle.template_version << "\n";
    if (!bundle.system_text.empty()) {
      std::cout << "--- system ---\n" << bundle.system_text << "\n--- user ---\n";
    }
    std::cout << bundle.user_text << "\n";
    return kExitOk;
  }

  if (detect_cmd->parsed()) {
    auto config = resolve_run_config(detect_flags);
    if (detect_method_opt->count() > 0 || detect_flags.config_path.empty()) {
      config.method = detection::parse_method_name(detect_method);
    }
    const auto data = corpus::load_corpus(config.corpus_path, config.schema_mode);
    auto backend_handle = pipeline::make_backend(config);
    const auto rows = pipeline::detect_corpus(data, config, *backend_handle);
    std::ofstream out(detect_out);
    if (!out) throw DataError("cannot open output file: " + detect_out);
    for (const auto& row : rows) out << detection::row_to_jsonl(row) << "\n";
    std::cout << rows.size() << " detections -> " << detect_out << "\n";
    return kExitOk;
  }

  if (reason_cmd->parsed()) {
    auto config = resolve_run_config(reason_flags);
    if (reason_hops_opt->count() > 0 || reason_flags.config_path.empty()) {
      config.hop_count = reason_hops;
    }
    const auto data = corpus::load_corpus(config.corpus_path, config.schema_mode);
    auto backend_handle = pipeline::make_backend(config);
    std::optional<std::filesystem::path> trace_dir;
    if (!reason_trace_dir.empty()) trace_dir = reason_trace_dir;
    const auto rows = pipeline::reason_corpus(data, config, *backend_handle, trace_dir);
    std::ofstream out(reason_out);
    if (!out) throw DataError("cannot open output file: " + reason_out);
    for (const auto& row : rows) out << eval::pair_findings_to_jsonl(row) << "\n";
    std::cout << rows.size() << " pair records -> " << reason_out << "\n";
    return kExitOk;
  }

  if (eval_cmd->parsed()) {
    const auto gold = corpus::load_corpus(eval_gold, mode_from(eval_mode));
    std::vector<detection::DetectionRow> detections;
    std::vector<eval::PairFindings> findings;
    const bool has_detections = eval_det_opt->count() > 0;
    const bool has_findings = eval_find_opt->count() > 0;
    if (!has_detections && !has_findings) {
      throw ConfigError("evaluate needs --detections and/or --findings");
    }
    if (has_detections) detections = detection::load_detections(eval_detections);
    if (has_findings) findings = eval::load_findings(eval_findings);
    eval::EvalOptions opts;
    opts.align_threshold = eval_align;
    const auto report = eval::evaluate(detections, findings, gold, opts,
                                       has_detections, has_findings);
    eval::write_report(report, eval_out);
    std::cout << eval::render_report_table(eval_out);
    return kExitOk;
  }

  if (report_cmd->parsed()) {
    if (report_pretty) {
      std::cout << eval::render_report_table(report_file);
    } else {
      std::ifstream in(report_file);
      if (!in) throw DataError("cannot open report file: " + report_file);
      std::cout << in.rdbuf();
    }
    return kExitOk;
  }

  if (run_cmd->parsed()) {
    auto config = resolve_run_config(run_flags);
    if (!run_out_dir.empty()) config.out_dir = run_out_dir;
    if (!run_method.empty()) config.method = detection::parse_method_name(run_method);
    if (run_hops_opt->count() > 0) config.hop_count = run_hops;
    if (run_no_detect) config.do_detect = false;
    if (run_no_reason) config.do_reason = false;
    const auto result = pipeline::run_pipeline(config);
    std::cout << "run dir: " << result.run_dir.string() << "\n";
    std::cout << eval::render_report_table(result.run_dir / "report.json");
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGeneric;
  }
}
