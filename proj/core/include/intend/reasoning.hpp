#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/prompting.hpp"

// The multi-hop reasoning chain: key-detail summary, conflict inference,
// conflicting-span extraction, plus parsing of the extraction response and
// grounding of model quotes back into the original answer text.

namespace intend::reasoning {

// Case-insensitive needle that short-circuits the chain when found in the
// reasoning-stage response.
inline constexpr std::string_view kNoConflictSentinel = "no conflict detected";

struct HopStep {
  prompting::PromptBundle prompt;
  backend::CompletionRecord completion;
};

struct HopTrace {
  int hop_count = 3;
  std::vector<HopStep> hops;  // in request order; at most hop_count entries
  bool short_circuited = false;

  // Response of the span-extraction step, when the chain got that far.
  const std::string* extraction_response() const;
  // Response of the reasoning step that rationale text is drawn from.
  const std::string* rationale_response() const;
};

struct RunOptions {
  prompting::PromptOptions prompt;
  bool swap_witnesses = false;
};

// hop_count=3 runs summary -> inference -> extraction; hop_count=2 runs the
// merged summary+inference prompt then extraction; hop_count=1 runs one
// merged prompt. The chain stops early when the reasoning response contains
// the no-conflict sentinel.
HopTrace run_hops(const corpus::ContextPair& pair, int hop_count,
                  backend::Backend& backend, const backend::GenerationConfig& config,
                  const RunOptions& opts = {});

struct RawContradiction {
  int index = 0;
  std::string quote_a;
  std::string quote_b;
  std::string relation_word;  // surface form between the two quotes
};

struct ParsedContradictions {
  std::vector<RawContradiction> findings;
  int skipped_blocks = 0;  // enumerated blocks that did not parse
};

// Extracts "Contradiction N:" blocks of the form
//   ["<quote>" from Witness A] <relation> ["<quote>" from Witness B]
// tolerating straight/curly quotes and Account/Witness wording. Blocks
// missing either attributed quote are skipped and counted.
ParsedContradictions parse_contradictions(std::string_view extraction_response);

// Renders findings in the exact block shape parse_contradictions reads;
// parse(format(x)) == x for well-formed findings.
std::string format_contradictions(const std::vector<RawContradiction>& findings);

struct GroundingConfig {
  double min_window_f1 = 0.5;  // acceptance threshold for fuzzy windows
  double window_band = 0.5;    // window lengths within +-band of quote length
};

enum class GroundRoute { Exact, NormalizedExact, Fuzzy, None };

std::string_view ground_route_name(GroundRoute route);

struct GroundResult {
  std::optional<corpus::SpanRef> span;
  double coverage = 0.0;   // coverage(quote, host), independent of acceptance
  GroundRoute route = GroundRoute::None;
  double window_f1 = 0.0;  // token F1 of the chosen window (1.0 for exact)
};

// Maps a model quote onto the host answer: exact substring first, then
// normalized token-sequence match, then the best contiguous token window by
// bag F1 (accepted at min_window_f1). The returned span is always anchored
// at the first occurrence of its surface, so grounding a returned surface
// again reproduces the same span.
GroundResult ground_span(std::string_view quote, std::string_view host,
                         const GroundingConfig& config = {});

struct ContradictionFinding {
  int index = 0;
  std::optional<corpus::SpanRef> grounded_a;
  std::optional<corpus::SpanRef> grounded_b;
  std::string quote_a;
  std::string quote_b;
  double coverage_a = 0.0;
  double coverage_b = 0.0;
  std::string rationale;
};

struct ReasonResult {
  std::vector<ContradictionFinding> findings;
  HopTrace trace;
  int skipped_blocks = 0;
};

// run_hops -> parse_contradictions -> ground_span per side. Rationale is the
// reasoning-response block sharing the most tokens with the finding's quotes,
// or the whole reasoning response when nothing overlaps.
ReasonResult reason(const corpus::ContextPair& pair, int hop_count,
                    backend::Backend& backend, const backend::GenerationConfig& config,
                    const GroundingConfig& grounding = {}, const RunOptions& opts = {});

}  // namespace intend::reasoning
