#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/prompting.hpp"

// Binary incongruence detection per context pair: the 6W path parses the six
// cloze statements out of the model response and aggregates them; the
// baseline paths extract a yes/no answer.

namespace intend::detection {

enum class ParseStatus { Full, Partial, Failed };

std::string_view parse_status_name(ParseStatus status);

struct SixWAssessment {
  std::map<prompting::SixWAspect, prompting::MaskLabel> labels;
  std::vector<prompting::SixWAspect> missing;  // in canonical aspect order
  std::string raw_response;
  ParseStatus parse_status = ParseStatus::Failed;
};

// Lexical scan over the response: for each aspect, the first label mention
// following an aspect anchor wins. Synonyms are normalized ("consistent" ->
// agrees, "conflicts with" -> contradict, "missing" -> absent). Total: every
// input maps to Full/Partial/Failed without throwing.
SixWAssessment parse_6w_response(std::string_view raw);

struct AggregateOptions {
  // Ablation switch: count absent-from as a positive signal too.
  bool absent_counts_as_incongruent = false;
};

// 1 iff any parsed aspect is contradict (or absent, under the ablation
// switch); partial assessments aggregate over the present aspects. Throws
// DataError for Failed assessments.
int aggregate_6w(const SixWAssessment& assessment, const AggregateOptions& opts = {});

enum class Method { SixW, QuestionPrompt, RegularPrompt };

std::string_view method_name(Method method);
Method parse_method_name(std::string_view name);  // throws ConfigError

struct DetectOptions {
  AggregateOptions aggregate;
  prompting::PromptOptions prompt;
  // Swap the two answers before prompting, to measure order sensitivity.
  bool swap_witnesses = false;
};

struct DetectionResult {
  std::string pair_id;
  int predicted_label = 0;
  Method method = Method::SixW;
  std::optional<SixWAssessment> assessment;  // present iff method == SixW
  backend::CompletionRecord completion;
  // Response could not be mapped to a label; scored as predicted 0 and
  // counted separately in reports.
  bool undecidable = false;
};

DetectionResult detect(const corpus::ContextPair& pair, Method method,
                       backend::Backend& backend,
                       const backend::GenerationConfig& config,
                       const DetectOptions& opts = {});

// Extracts the first affirmative/negative token of a baseline response.
// nullopt when neither appears.
std::optional<int> extract_yes_no(std::string_view response);

// ---- detections.jsonl ------------------------------------------------------
// {"pair_id":..,"pred":0|1,"method":..,"aspects":{"identity":"agrees",...},
//  "parse_status":..,"undecidable":0|1}

struct DetectionRow {
  std::string pair_id;
  int pred = 0;
  std::string method;
  std::map<std::string, std::string> aspects;  // empty for baseline methods
  std::string parse_status;
  bool undecidable = false;
};

DetectionRow to_row(const DetectionResult& result);
std::string row_to_jsonl(const DetectionRow& row);
std::vector<DetectionRow> load_detections(const std::filesystem::path& path);

}  // namespace intend::detection
