#include "intend/detection.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <nlohmann/json.hpp>

#include "intend/errors.hpp"
#include "intend/metrics.hpp"
#include "intend/text.hpp"

namespace intend::detection {

using nlohmann::json;
using prompting::MaskLabel;
using prompting::SixWAspect;

std::string_view parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::Full: return "full";
    case ParseStatus::Partial: return "partial";
    case ParseStatus::Failed: return "failed";
  }
  return "failed";
}

namespace {

struct AnchorSet {
  SixWAspect aspect;
  std::array<std::string_view, 2> anchors;  // empty second slot allowed
};

// Anchor words locating each aspect's statement in a response. Prefix
// matching at word starts, so "identifications" and "actions" still hit.
constexpr std::array<AnchorSet, 6> kAnchorSets = {{
    {SixWAspect::Identity, {"identification", "identity"}},
    {SixWAspect::Action, {"action", ""}},
    {SixWAspect::Object, {"object", ""}},
    {SixWAspect::Timeline, {"timeline", ""}},
    {SixWAspect::Location, {"location", ""}},
    {SixWAspect::Reason, {"reason", "motive"}},
}};

struct LabelKeyword {
  std::string_view word;
  MaskLabel label;
};

constexpr std::array<LabelKeyword, 7> kLabelKeywords = {{
    {"agrees", MaskLabel::AgreesWith},
    {"agree", MaskLabel::AgreesWith},
    {"consistent", MaskLabel::AgreesWith},
    {"contradict", MaskLabel::Contradict},
    {"conflict", MaskLabel::Contradict},
    {"absent", MaskLabel::AbsentFrom},
    {"missing", MaskLabel::AbsentFrom},
}};

// All word-start positions of any aspect anchor, used to bound the text
// segment a label may be read from.
std::vector<std::size_t> anchor_positions(std::string_view response) {
  std::vector<std::size_t> positions;
  for (const auto& set : kAnchorSets) {
    for (const auto anchor : set.anchors) {
      if (anchor.empty()) continue;
      std::size_t from = 0;
      while (true) {
        const auto pos = text::find_icase(response, anchor, from);
        if (pos == std::string_view::npos) break;
        if (text::at_word_start(response, pos)) positions.push_back(pos);
        from = pos + 1;
      }
    }
  }
  std::sort(positions.begin(), positions.end());
  return positions;
}

std::optional<MaskLabel> first_label_in(std::string_view segment) {
  std::size_t best_pos = std::string_view::npos;
  std::optional<MaskLabel> best;
  for (const auto& kw : kLabelKeywords) {
    std::size_t from = 0;
    while (true) {
      const auto pos = text::find_icase(segment, kw.word, from);
      if (pos == std::string_view::npos) break;
      if (text::at_word_start(segment, pos)) {
        if (pos < best_pos) {
          best_pos = pos;
          best = kw.label;
        }
        break;
      }
      from = pos + 1;
    }
  }
  return best;
}

}  // namespace

SixWAssessment parse_6w_response(std::string_view raw) {
  SixWAssessment out;
  out.raw_response = std::string(raw);
  const auto boundaries = anchor_positions(raw);

  for (const auto& set : kAnchorSets) {
    std::optional<MaskLabel> found;
    for (const auto anchor : set.anchors) {
      if (anchor.empty() || found) continue;
      std::size_t from = 0;
      while (!found) {
        const auto pos = text::find_icase(raw, anchor, from);
        if (pos == std::string_view::npos) break;
        from = pos + 1;
        if (!text::at_word_start(raw, pos)) continue;
        // Read until the next anchor occurrence (any aspect) or end of text.
        const auto seg_begin = pos + anchor.size();
        auto next = std::upper_bound(boundaries.begin(), boundaries.end(), pos + anchor.size() - 1);
        const std::size_t seg_end = next == boundaries.end() ? raw.size() : *next;
        if (seg_begin >= seg_end) continue;
        found = first_label_in(raw.substr(seg_begin, seg_end - seg_begin));
      }
    }
    if (found) {
      out.labels[set.aspect] = *found;
    } else {
      out.missing.push_back(set.aspect);
    }
  }

  if (out.labels.size() == prompting::kAspects.size()) {
    out.parse_status = ParseStatus::Full;
  } else if (!out.labels.empty()) {
    out.parse_status = ParseStatus::Partial;
  } else {
    out.parse_status = ParseStatus::Failed;
  }
  return out;
}

int aggregate_6w(const SixWAssessment& assessment, const AggregateOptions& opts) {
  if (assessment.parse_status == ParseStatus::Failed) {
    throw DataError("cannot aggregate a failed 6W assessment");
  }
  for (const auto& [aspect, label] : assessment.labels) {
    if (label == MaskLabel::Contradict) return 1;
    if (opts.absent_counts_as_incongruent && label == MaskLabel::AbsentFrom) return 1;
  }
  return 0;
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::SixW: return "6w";
    case Method::QuestionPrompt: return "question";
    case Method::RegularPrompt: return "regular";
  }
  return "6w";
}

Method parse_method_name(std::string_view name) {
  if (name == "6w") return Method::SixW;
  if (name == "question") return Method::QuestionPrompt;
  if (name == "regular") return Method::RegularPrompt;
  throw ConfigError("unknown detection method \"" + std::string(name) +
                    "\" (expected 6w, question, or regular)");
}

std::optional<int> extract_yes_no(std::string_view response) {
  for (const auto& token : metrics::tokenize_spans(response)) {
    if (token.norm == "yes" || token.norm == "true" || token.norm == "1") return 1;
    if (token.norm == "no" || token.norm == "false" || token.norm == "0") return 0;
  }
  return std::nullopt;
}

namespace {

corpus::ContextPair swapped(const corpus::ContextPair& pair) {
  corpus::ContextPair s = pair;
  std::swap(s.answer_a, s.answer_b);
  for (auto& f : s.gold_findings) std::swap(f.span_a, f.span_b);
  return s;
}

}  // namespace

DetectionResult detect(const corpus::ContextPair& pair, Method method,
                       backend::Backend& backend,
                       const backend::GenerationConfig& config,
                       const DetectOptions& opts) {
  const corpus::ContextPair& prompted = opts.swap_witnesses ? swapped(pair) : pair;

  prompting::PromptBundle prompt;
  switch (method) {
    case Method::SixW:
      prompt = prompting::build_6w_prompt(prompted, opts.prompt);
      break;
    case Method::QuestionPrompt:
      prompt = prompting::build_question_prompt(prompted, opts.prompt);
      break;
    case Method::RegularPrompt:
      prompt = prompting::build_regular_prompt(prompted, opts.prompt);
      break;
  }

  DetectionResult result;
  result.pair_id = pair.pair_id;
  result.method = method;
  result.completion = backend.complete(prompt, config);

  if (method == Method::SixW) {
    result.assessment = parse_6w_response(result.completion.response_text);
    if (result.assessment->parse_status == ParseStatus::Failed) {
      result.undecidable = true;
      result.predicted_label = 0;
    } else {
      result.predicted_label = aggregate_6w(*result.assessment, opts.aggregate);
    }
  } else {
    const auto answer = extract_yes_no(result.completion.response_text);
    if (answer) {
      result.predicted_label = *answer;
    } else {
      result.undecidable = true;
      result.predicted_label = 0;
    }
  }
  return result;
}

DetectionRow to_row(const DetectionResult& result) {
  DetectionRow row;
  row.pair_id = result.pair_id;
  row.pred = result.predicted_label;
  row.method = std::string(method_name(result.method));
  row.undecidable = result.undecidable;
  if (result.assessment) {
    row.parse_status = std::string(parse_status_name(result.assessment->parse_status));
    for (const auto& [aspect, label] : result.assessment->labels) {
      row.aspects[std::string(prompting::aspect_name(aspect))] =
          std::string(prompting::label_short(label));
    }
  } else {
    row.parse_status = result.undecidable ? "failed" : "full";
  }
  return row;
}

std::string row_to_jsonl(const DetectionRow& row) {
  json aspects = json::object();
  for (const auto& [aspect, label] : row.aspects) aspects[aspect] = label;
  const json j{{"pair_id", row.pair_id},
               {"pred", row.pred},
               {"method", row.method},
               {"aspects", aspects},
               {"parse_status", row.parse_status},
               {"undecidable", row.undecidable ? 1 : 0}};
  return j.dump();
}

std::vector<DetectionRow> load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open detections file: " + path.string());
  std::vector<DetectionRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed detections line: " + e.what());
    }
    DetectionRow row;
    row.pair_id = j.at("pair_id").get<std::string>();
    row.pred = j.at("pred").get<int>();
    row.method = j.value("method", "");
    row.parse_status = j.value("parse_status", "");
    if (const auto a = j.find("aspects"); a != j.end() && a->is_object()) {
      for (const auto& [k, v] : a->items()) row.aspects[k] = v.get<std::string>();
    }
    const auto und = j.find("undecidable");
    row.undecidable = und != j.end() && und->get<int>() != 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace intend::detection
