#include "intend/reasoning.hpp"

#include <algorithm>
#include <cmath>

#include "intend/errors.hpp"
#include "intend/metrics.hpp"
#include "intend/text.hpp"

namespace intend::reasoning {

const std::string* HopTrace::extraction_response() const {
  if (short_circuited || hops.empty()) return nullptr;
  // The extraction step is always the last request of a completed chain.
  return &hops.back().completion.response_text;
}

const std::string* HopTrace::rationale_response() const {
  if (hops.empty()) return nullptr;
  switch (hop_count) {
    case 3:
      return hops.size() >= 2 ? &hops[1].completion.response_text : nullptr;
    default:
      return &hops[0].completion.response_text;
  }
}

namespace {

bool has_sentinel(std::string_view response) {
  return text::fold_for_match(response).find(kNoConflictSentinel) != std::string::npos;
}

corpus::ContextPair swapped(const corpus::ContextPair& pair) {
  corpus::ContextPair s = pair;
  std::swap(s.answer_a, s.answer_b);
  for (auto& f : s.gold_findings) std::swap(f.span_a, f.span_b);
  return s;
}

}  // namespace

HopTrace run_hops(const corpus::ContextPair& original_pair, int hop_count,
                  backend::Backend& backend, const backend::GenerationConfig& config,
                  const RunOptions& opts) {
  if (hop_count < 1 || hop_count > 3) {
    throw ConfigError("hop count must be 1, 2, or 3, got " + std::to_string(hop_count));
  }
  const corpus::ContextPair pair =
      opts.swap_witnesses ? swapped(original_pair) : original_pair;

  HopTrace trace;
  trace.hop_count = hop_count;

  const auto run = [&](prompting::PromptBundle prompt) -> const std::string& {
    auto record = backend.complete(prompt, config);
    trace.hops.push_back({std::move(prompt), std::move(record)});
    return trace.hops.back().completion.response_text;
  };

  if (hop_count == 3) {
    const auto& summary = run(prompting::build_hop_prompt(1, pair, "", opts.prompt));
    const auto& explanation =
        run(prompting::build_hop_prompt(2, pair, summary, opts.prompt));
    if (has_sentinel(explanation)) {
      trace.short_circuited = true;
      return trace;
    }
    run(prompting::build_hop_prompt(3, pair, explanation, opts.prompt));
  } else if (hop_count == 2) {
    const auto& explanation = run(prompting::build_merged_hop_prompt(2, pair, opts.prompt));
    if (has_sentinel(explanation)) {
      trace.short_circuited = true;
      return trace;
    }
    run(prompting::build_hop_prompt(3, pair, explanation, opts.prompt));
  } else {
    const auto& merged = run(prompting::build_merged_hop_prompt(1, pair, opts.prompt));
    if (has_sentinel(merged)) {
      trace.short_circuited = true;
      return trace;
    }
  }
  return trace;
}

namespace {

bool is_quote_char(char32_t cp) {
  return cp == U'"' || cp == 0x201C || cp == 0x201D || cp == 0x201E;
}

struct QuoteGroup {
  std::string quote;
  char side = 0;  // 'a' or 'b', 0 when unattributed
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
};

// Parses one bracketed group: ["<quote>" from Witness A]. The attribution is
// read after the closing quote so quoted text mentioning a witness cannot
// misattribute the group.
std::optional<QuoteGroup> parse_group(std::string_view block, std::size_t open,
                                      std::size_t close) {
  const std::string_view inside = block.substr(open + 1, close - open - 1);
  const auto cps = text::decode_utf8(inside);
  std::size_t q1 = inside.size();
  std::size_t q1_end = 0;
  for (const auto& c : cps) {
    if (is_quote_char(c.value)) {
      q1 = c.byte_begin;
      q1_end = c.byte_end;
      break;
    }
  }
  if (q1 >= inside.size()) return std::nullopt;
  std::size_t q2 = inside.size();
  std::size_t q2_end = 0;
  for (auto it = cps.rbegin(); it != cps.rend(); ++it) {
    if (is_quote_char(it->value) && it->byte_begin > q1) {
      q2 = it->byte_begin;
      q2_end = it->byte_end;
      break;
    }
  }
  if (q2 >= inside.size()) return std::nullopt;

  QuoteGroup group;
  group.quote = std::string(inside.substr(q1_end, q2 - q1_end));
  group.byte_begin = open;
  group.byte_end = close + 1;
  const std::string_view tail = inside.substr(q2_end);
  const bool a = text::contains_icase(tail, "witness a") ||
                 text::contains_icase(tail, "account a") ||
                 text::contains_icase(tail, "testimony 1");
  const bool b = text::contains_icase(tail, "witness b") ||
                 text::contains_icase(tail, "account b") ||
                 text::contains_icase(tail, "testimony 2");
  if (a == b) return std::nullopt;  // missing or ambiguous attribution
  group.side = a ? 'a' : 'b';
  return group;
}

std::string strip_relation(std::string_view between) {
  std::string out = text::trim(between);
  while (!out.empty() && (out.back() == ':' || out.back() == ',')) out.pop_back();
  while (!out.empty() && (out.front() == ':' || out.front() == ',')) out.erase(out.begin());
  return text::trim(out);
}

}  // namespace

ParsedContradictions parse_contradictions(std::string_view response) {
  ParsedContradictions out;

  // Locate "Contradiction <n> :" markers.
  struct Marker {
    std::size_t pos = 0;
    std::size_t content_begin = 0;
    int number = 0;
  };
  std::vector<Marker> markers;
  std::size_t from = 0;
  while (true) {
    const auto pos = text::find_icase(response, "contradiction", from);
    if (pos == std::string_view::npos) break;
    from = pos + 1;
    if (!text::at_word_start(response, pos)) continue;
    std::size_t i = pos + std::string_view("contradiction").size();
    while (i < response.size() && (response[i] == ' ' || response[i] == '\t')) ++i;
    std::size_t digits_begin = i;
    while (i < response.size() && std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
    if (i == digits_begin) continue;  // "No contradiction", prose mentions, ...
    int number = 0;
    for (std::size_t d = digits_begin; d < i && number < 100000000; ++d) {
      number = number * 10 + (response[d] - '0');
    }
    while (i < response.size() && (response[i] == ' ' || response[i] == '\t')) ++i;
    if (i >= response.size() || response[i] != ':') continue;
    markers.push_back({pos, i + 1, number});
  }

  for (std::size_t m = 0; m < markers.size(); ++m) {
    const std::size_t block_end =
        m + 1 < markers.size() ? markers[m + 1].pos : response.size();
    const std::string_view block =
        response.substr(markers[m].content_begin, block_end - markers[m].content_begin);

    // Collect bracketed quote groups in order.
    std::vector<QuoteGroup> groups;
    std::size_t scan = 0;
    while (scan < block.size()) {
      const auto open = block.find('[', scan);
      if (open == std::string_view::npos) break;
      const auto close = block.find(']', open + 1);
      if (close == std::string_view::npos) break;
      if (auto group = parse_group(block, open, close)) {
        groups.push_back(std::move(*group));
      }
      scan = close + 1;
    }

    const auto first_of = [&](char side) -> const QuoteGroup* {
      for (const auto& g : groups) {
        if (g.side == side) return &g;
      }
      return nullptr;
    };
    const QuoteGroup* ga = first_of('a');
    const QuoteGroup* gb = first_of('b');
    if (ga == nullptr || gb == nullptr || ga->quote.empty() || gb->quote.empty()) {
      ++out.skipped_blocks;
      continue;
    }

    RawContradiction finding;
    finding.index = markers[m].number;
    finding.quote_a = ga->quote;
    finding.quote_b = gb->quote;
    const std::size_t rel_begin = std::min(ga->byte_end, gb->byte_end);
    const std::size_t rel_end = std::max(ga->byte_begin, gb->byte_begin);
    if (rel_begin < rel_end) {
      finding.relation_word = strip_relation(block.substr(rel_begin, rel_end - rel_begin));
    }
    out.findings.push_back(std::move(finding));
  }
  return out;
}

std::string format_contradictions(const std::vector<RawContradiction>& findings) {
  std::string out;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    const auto& f = findings[i];
    if (i > 0) out += "\n";
    out += "Contradiction " + std::to_string(f.index) + ": [\"" + f.quote_a +
           "\" from Witness A] " +
           (f.relation_word.empty() ? "contradicts" : f.relation_word) + " [\"" +
           f.quote_b + "\" from Witness B]";
  }
  return out;
}

namespace {

corpus::SpanRef span_at_first_occurrence(std::string_view host, std::string_view surface) {
  const auto byte_pos = host.find(surface);
  // Callers guarantee surface is a substring of host.
  const std::size_t cp_start = text::cp_index_at_byte(host, byte_pos);
  const std::size_t cp_end = cp_start + text::cp_length(surface);
  corpus::SpanRef span;
  span.start = static_cast<std::int64_t>(cp_start);
  span.end = static_cast<std::int64_t>(cp_end);
  span.surface = std::string(surface);
  return span;
}

}  // namespace

GroundResult ground_span(std::string_view quote, std::string_view host,
                         const GroundingConfig& config) {
  GroundResult result;
  result.coverage = metrics::coverage(quote, host);
  if (host.empty()) return result;

  const std::string trimmed = text::trim(quote);
  if (!trimmed.empty() && host.find(trimmed) != std::string_view::npos) {
    result.span = span_at_first_occurrence(host, trimmed);
    result.route = GroundRoute::Exact;
    result.window_f1 = 1.0;
    return result;
  }

  const auto host_tokens = metrics::tokenize_spans(host);
  const auto quote_tokens = metrics::tokenize_spans(trimmed);
  if (quote_tokens.empty() || host_tokens.empty()) return result;

  // Normalized exact: the quote's token sequence appears contiguously.
  const std::size_t hn = host_tokens.size();
  const std::size_t qn = quote_tokens.size();
  for (std::size_t start = 0; qn <= hn && start + qn <= hn; ++start) {
    std::size_t k = 0;
    while (k < qn && host_tokens[start + k].norm == quote_tokens[k].norm) ++k;
    if (k == qn) {
      const std::string surface = text::cp_slice(
          host, host_tokens[start].cp_begin, host_tokens[start + qn - 1].cp_end);
      result.span = span_at_first_occurrence(host, surface);
      result.route = GroundRoute::NormalizedExact;
      result.window_f1 = 1.0;
      return result;
    }
  }

  // Fuzzy: best contiguous token window by bag F1, window lengths within
  // +-window_band of the quote length. Ties prefer the earliest then the
  // shortest window.
  metrics::TokenBag quote_bag;
  for (const auto& t : quote_tokens) quote_bag.add(t.norm);
  const auto lo = static_cast<std::size_t>(std::max(
      1.0, std::ceil(static_cast<double>(qn) * (1.0 - config.window_band))));
  const auto hi = static_cast<std::size_t>(std::max(
      1.0, std::floor(static_cast<double>(qn) * (1.0 + config.window_band))));

  double best_f1 = -1.0;
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  for (std::size_t start = 0; start < hn; ++start) {
    metrics::TokenBag window;
    for (std::size_t len = 1; len <= hi && start + len <= hn; ++len) {
      window.add(host_tokens[start + len - 1].norm);
      if (len < lo) continue;
      const double f1 = metrics::token_prf(window, quote_bag).f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_start = start;
        best_len = len;
      }
    }
  }
  result.window_f1 = std::max(best_f1, 0.0);
  if (best_f1 >= config.min_window_f1 && best_len > 0) {
    const std::string surface =
        text::cp_slice(host, host_tokens[best_start].cp_begin,
                       host_tokens[best_start + best_len - 1].cp_end);
    result.span = span_at_first_occurrence(host, surface);
    result.route = GroundRoute::Fuzzy;
  }
  return result;
}

std::string_view ground_route_name(GroundRoute route) {
  switch (route) {
    case GroundRoute::Exact: return "exact";
    case GroundRoute::NormalizedExact: return "normalized";
    case GroundRoute::Fuzzy: return "fuzzy";
    case GroundRoute::None: return "none";
  }
  return "none";
}

namespace {

// Rationale attachment: the reasoning-response line sharing the most tokens
// with the finding's quotes, else the whole response.
std::string attach_rationale(std::string_view reasoning_text,
                             const RawContradiction& finding) {
  metrics::TokenBag quote_bag = metrics::tokenize(finding.quote_a);
  for (auto& t : metrics::tokenize_spans(finding.quote_b)) quote_bag.add(std::move(t.norm));

  int best_shared = 0;
  std::string best_line;
  std::size_t begin = 0;
  while (begin <= reasoning_text.size()) {
    const auto nl = reasoning_text.find('\n', begin);
    const std::string_view line = reasoning_text.substr(
        begin, nl == std::string_view::npos ? std::string_view::npos : nl - begin);
    if (!text::trim(line).empty()) {
      const int shared = metrics::tokenize(line).intersection_size(quote_bag);
      if (shared > best_shared) {
        best_shared = shared;
        best_line = text::trim(line);
      }
    }
    if (nl == std::string_view::npos) break;
    begin = nl + 1;
  }
  if (best_shared > 0) return best_line;
  return std::string(text::trim(reasoning_text));
}

}  // namespace

ReasonResult reason(const corpus::ContextPair& pair, int hop_count,
                    backend::Backend& backend, const backend::GenerationConfig& config,
                    const GroundingConfig& grounding, const RunOptions& opts) {
  ReasonResult result;
  result.trace = run_hops(pair, hop_count, backend, config, opts);
  if (result.trace.short_circuited) return result;

  const std::string* extraction = result.trace.extraction_response();
  if (extraction == nullptr) return result;
  auto parsed = parse_contradictions(*extraction);
  result.skipped_blocks = parsed.skipped_blocks;

  const std::string* rationale_src = result.trace.rationale_response();
  // Hosts are the original sides even when the prompt order was swapped.
  const std::string& host_a =
      opts.swap_witnesses ? pair.answer_b.text : pair.answer_a.text;
  const std::string& host_b =
      opts.swap_witnesses ? pair.answer_a.text : pair.answer_b.text;

  for (auto& raw : parsed.findings) {
    ContradictionFinding finding;
    finding.index = raw.index;
    finding.quote_a = raw.quote_a;
    finding.quote_b = raw.quote_b;
    auto ga = ground_span(raw.quote_a, host_a, grounding);
    auto gb = ground_span(raw.quote_b, host_b, grounding);
    finding.grounded_a = std::move(ga.span);
    finding.grounded_b = std::move(gb.span);
    finding.coverage_a = ga.coverage;
    finding.coverage_b = gb.coverage;
    if (rationale_src != nullptr) {
      finding.rationale = attach_rationale(*rationale_src, raw);
    }
    if (opts.swap_witnesses) {
      // Map the model's A/B wording back onto the original sides.
      std::swap(finding.quote_a, finding.quote_b);
      std::swap(finding.grounded_a, finding.grounded_b);
      std::swap(finding.coverage_a, finding.coverage_b);
    }
    result.findings.push_back(std::move(finding));
  }
  return result;
}

}  // namespace intend::reasoning
