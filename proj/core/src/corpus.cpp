#include "intend/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "intend/errors.hpp"
#include "intend/metrics.hpp"
#include "intend/text.hpp"

namespace intend::corpus {

using nlohmann::json;

std::string check_span(const SpanRef& span, std::string_view host_text) {
  if (span.start < 0 || span.start >= span.end) {
    return "span range [" + std::to_string(span.start) + ", " +
           std::to_string(span.end) + ") is not a valid half-open range";
  }
  const auto host_len = static_cast<std::int64_t>(text::cp_length(host_text));
  if (span.end > host_len) {
    return "span end " + std::to_string(span.end) + " past host length " +
           std::to_string(host_len);
  }
  const std::string actual = text::cp_slice(
      host_text, static_cast<std::size_t>(span.start), static_cast<std::size_t>(span.end));
  if (actual != span.surface) {
    return "span surface \"" + span.surface + "\" does not equal host text \"" +
           actual + "\" at [" + std::to_string(span.start) + ", " +
           std::to_string(span.end) + ")";
  }
  return {};
}

std::string_view schema_mode_name(SchemaMode mode) {
  return mode == SchemaMode::Substring ? "substring" : "concatenation";
}

SchemaMode parse_schema_mode(std::string_view name) {
  if (name == "substring") return SchemaMode::Substring;
  if (name == "concatenation") return SchemaMode::Concatenation;
  throw ConfigError("unknown schema mode \"" + std::string(name) +
                    "\" (expected substring or concatenation)");
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw DataError(where + ": missing or non-string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

SpanRef parse_span(const json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": span is not an object");
  SpanRef span;
  const auto start = j.find("start");
  const auto end = j.find("end");
  if (start == j.end() || !start->is_number_integer() || end == j.end() ||
      !end->is_number_integer()) {
    throw DataError(where + ": span start/end must be integers");
  }
  span.start = start->get<std::int64_t>();
  span.end = end->get<std::int64_t>();
  span.surface = require_string(j, "surface", where);
  return span;
}

json span_to_json(const SpanRef& span) {
  return json{{"start", span.start}, {"end", span.end}, {"surface", span.surface}};
}

Testimony parse_testimony(const json& j, const std::string& where) {
  Testimony t;
  t.testimony_id = require_string(j, "testimony_id", where);
  t.event_id = require_string(j, "event_id", where);
  t.witness_id = require_string(j, "witness_id", where);
  t.full_text = require_string(j, "full_text", where);
  const auto segs = j.find("qa_segments");
  if (segs != j.end() && !segs->is_null()) {
    if (!segs->is_array()) throw DataError(where + ": qa_segments must be an array");
    for (const auto& seg : *segs) {
      QaSegment qa;
      qa.question = require_string(seg, "q", where);
      qa.answer = require_string(seg, "a", where);
      t.qa_segments.push_back(std::move(qa));
    }
  }
  return t;
}

ContextPair parse_pair(const json& j, const std::string& where) {
  ContextPair p;
  p.pair_id = require_string(j, "pair_id", where);
  p.context = require_string(j, "context", where);
  const auto parse_answer = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_object()) {
      throw DataError(where + ": missing answer object \"" + key + "\"");
    }
    AnswerRef a;
    a.text = require_string(*it, "text", where);
    a.testimony_id = require_string(*it, "testimony_id", where);
    return a;
  };
  p.answer_a = parse_answer("answer_a");
  p.answer_b = parse_answer("answer_b");
  const auto label = j.find("gold_label");
  if (label != j.end() && !label->is_null()) {
    if (!label->is_number_integer()) {
      throw DataError(where + ": gold_label must be 0, 1, or null");
    }
    const auto v = label->get<int>();
    if (v != 0 && v != 1) throw DataError(where + ": gold_label must be 0, 1, or null");
    p.gold_label = v;
  }
  const auto findings = j.find("gold_findings");
  if (findings != j.end() && !findings->is_null()) {
    if (!findings->is_array()) throw DataError(where + ": gold_findings must be an array");
    for (const auto& f : *findings) {
      GoldFinding gf;
      const auto idx = f.find("i");
      if (idx == f.end() || !idx->is_number_integer()) {
        throw DataError(where + ": gold finding is missing integer index \"i\"");
      }
      gf.index = idx->get<int>();
      gf.span_a = parse_span(f.value("span_a", json()), where + " span_a");
      gf.span_b = parse_span(f.value("span_b", json()), where + " span_b");
      p.gold_findings.push_back(std::move(gf));
    }
  }
  return p;
}

}  // namespace

Corpus parse_corpus(std::istream& in, SchemaMode mode, std::string_view source_name) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON line: " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": record is not a JSON object");
    const std::string kind = require_string(j, "kind", where);
    if (kind == "testimony") {
      corpus.testimonies.push_back(parse_testimony(j, where));
    } else if (kind == "pair") {
      corpus.pairs.push_back(parse_pair(j, where));
    } else {
      throw DataError(where + ": unknown record kind \"" + kind + "\"");
    }
  }
  validate_corpus(corpus, mode);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, SchemaMode mode) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  return parse_corpus(in, mode, path.string());
}

void validate_corpus(const Corpus& corpus, SchemaMode mode) {
  std::unordered_map<std::string, const Testimony*> by_id;
  for (const auto& t : corpus.testimonies) {
    if (!by_id.emplace(t.testimony_id, &t).second) {
      throw ValidationError("testimony " + t.testimony_id +
                            ": duplicate testimony_id");
    }
    if (text::trim(t.full_text).empty()) {
      throw ValidationError("testimony " + t.testimony_id + ": empty full_text");
    }
    if (mode == SchemaMode::Substring) {
      for (const auto& qa : t.qa_segments) {
        if (t.full_text.find(qa.answer) == std::string::npos) {
          throw ValidationError("testimony " + t.testimony_id +
                                ": qa answer is not a contiguous substring of "
                                "full_text (substring mode)");
        }
      }
    } else {
      std::string joined;
      for (const auto& qa : t.qa_segments) joined += qa.answer;
      if (joined != t.full_text) {
        throw ValidationError("testimony " + t.testimony_id +
                              ": full_text does not equal the concatenation of "
                              "qa answers (concatenation mode)");
      }
    }
  }

  std::unordered_set<std::string> pair_ids;
  for (const auto& p : corpus.pairs) {
    const std::string where = "pair " + p.pair_id;
    if (!pair_ids.insert(p.pair_id).second) {
      throw ValidationError(where + ": duplicate pair_id");
    }
    const auto ta = by_id.find(p.answer_a.testimony_id);
    const auto tb = by_id.find(p.answer_b.testimony_id);
    if (ta == by_id.end()) {
      throw ValidationError(where + ": answer_a references unknown testimony " +
                            p.answer_a.testimony_id);
    }
    if (tb == by_id.end()) {
      throw ValidationError(where + ": answer_b references unknown testimony " +
                            p.answer_b.testimony_id);
    }
    if (p.answer_a.testimony_id == p.answer_b.testimony_id) {
      throw ValidationError(where + ": both answers come from the same testimony");
    }
    if (ta->second->event_id != tb->second->event_id) {
      throw ValidationError(where + ": answers come from different events (" +
                            ta->second->event_id + " vs " + tb->second->event_id + ")");
    }
    if (!p.gold_findings.empty() && p.gold_label != 1) {
      throw ValidationError(where + ": gold_findings present but gold_label is not 1");
    }
    if (p.gold_label == 0 && !p.gold_findings.empty()) {
      throw ValidationError(where + ": gold_label 0 with non-empty gold_findings");
    }
    std::set<int> indices;
    for (const auto& f : p.gold_findings) {
      if (!indices.insert(f.index).second) {
        throw ValidationError(where + ": duplicate finding index " +
                              std::to_string(f.index));
      }
      if (auto err = check_span(f.span_a, p.answer_a.text); !err.empty()) {
        throw ValidationError(where + " finding " + std::to_string(f.index) +
                              " span_a: " + err);
      }
      if (auto err = check_span(f.span_b, p.answer_b.text); !err.empty()) {
        throw ValidationError(where + " finding " + std::to_string(f.index) +
                              " span_b: " + err);
      }
    }
    if (!indices.empty() &&
        (*indices.begin() != 1 ||
         *indices.rbegin() != static_cast<int>(indices.size()))) {
      throw ValidationError(where + ": finding indices must be contiguous from 1");
    }
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& t : corpus.testimonies) {
    json segs = json::array();
    for (const auto& qa : t.qa_segments) {
      segs.push_back({{"q", qa.question}, {"a", qa.answer}});
    }
    const json j{{"kind", "testimony"},
                 {"testimony_id", t.testimony_id},
                 {"event_id", t.event_id},
                 {"witness_id", t.witness_id},
                 {"full_text", t.full_text},
                 {"qa_segments", segs}};
    out << j.dump() << "\n";
  }
  for (const auto& p : corpus.pairs) {
    json findings = json::array();
    for (const auto& f : p.gold_findings) {
      findings.push_back({{"i", f.index},
                          {"span_a", span_to_json(f.span_a)},
                          {"span_b", span_to_json(f.span_b)}});
    }
    const json j{
        {"kind", "pair"},
        {"pair_id", p.pair_id},
        {"context", p.context},
        {"answer_a", {{"text", p.answer_a.text}, {"testimony_id", p.answer_a.testimony_id}}},
        {"answer_b", {{"text", p.answer_b.text}, {"testimony_id", p.answer_b.testimony_id}}},
        {"gold_label", p.gold_label ? json(*p.gold_label) : json(nullptr)},
        {"gold_findings", findings}};
    out << j.dump() << "\n";
  }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path.string());
  write_corpus(corpus, out);
}

CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::unordered_set<std::string> events;
  for (const auto& t : corpus.testimonies) events.insert(t.event_id);
  stats.n_events = static_cast<std::int64_t>(events.size());
  stats.n_testimonies = static_cast<std::int64_t>(corpus.testimonies.size());

  std::unordered_set<std::string> contexts;
  std::int64_t span_count = 0;
  std::int64_t token_sum = 0;
  for (const auto& p : corpus.pairs) {
    contexts.insert(p.context);
    ++stats.n_pairs;
    if (p.gold_label == 1) {
      ++stats.n_incongruent;
    } else if (!p.gold_label.has_value()) {
      ++stats.n_unlabeled;
    }
    for (const auto& f : p.gold_findings) {
      token_sum += metrics::tokenize(f.span_a.surface).size();
      token_sum += metrics::tokenize(f.span_b.surface).size();
      span_count += 2;
    }
  }
  stats.n_unique_contexts = static_cast<std::int64_t>(contexts.size());
  stats.n_non_incongruent = stats.n_pairs - stats.n_incongruent;
  stats.mean_gold_span_tokens =
      span_count > 0 ? static_cast<double>(token_sum) / static_cast<double>(span_count) : 0.0;
  return stats;
}

namespace {

// Portable Fisher-Yates; std::shuffle's draw sequence is
// implementation-defined, and splits must reproduce across toolchains.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::int64_t round_half_away(double x) {
  return static_cast<std::int64_t>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

}  // namespace

SplitResult split_corpus(const Corpus& corpus, double train_fraction,
                         std::uint64_t seed, SplitGranularity granularity) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0,1), got " +
                      std::to_string(train_fraction));
  }
  const std::size_t n = corpus.pairs.size();
  if (n < 2) throw DataError("corpus too small to split (need at least 2 pairs)");

  const auto target = static_cast<std::size_t>(
      round_half_away(train_fraction * static_cast<double>(n)));

  std::vector<bool> in_train(n, false);
  if (granularity == SplitGranularity::Pair) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    deterministic_shuffle(order, seed);
    for (std::size_t k = 0; k < target && k < n; ++k) in_train[order[k]] = true;
  } else {
    std::unordered_map<std::string, std::string> event_of_testimony;
    for (const auto& t : corpus.testimonies) {
      event_of_testimony[t.testimony_id] = t.event_id;
    }
    std::vector<std::string> events;
    std::unordered_map<std::string, std::vector<std::size_t>> pairs_of_event;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = event_of_testimony.find(corpus.pairs[i].answer_a.testimony_id);
      const std::string ev = it == event_of_testimony.end() ? std::string() : it->second;
      auto [slot, inserted] = pairs_of_event.try_emplace(ev);
      if (inserted) events.push_back(ev);
      slot->second.push_back(i);
    }
    deterministic_shuffle(events, seed);
    std::size_t assigned = 0;
    for (const auto& ev : events) {
      if (assigned >= target) break;
      for (const std::size_t i : pairs_of_event[ev]) in_train[i] = true;
      assigned += pairs_of_event[ev].size();
    }
  }

  SplitResult result;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? result.train : result.test).push_back(corpus.pairs[i]);
  }
  return result;
}

std::vector<Testimony> referenced_testimonies(
    const Corpus& corpus, const std::vector<ContextPair>& pairs) {
  std::unordered_set<std::string> wanted;
  for (const auto& p : pairs) {
    wanted.insert(p.answer_a.testimony_id);
    wanted.insert(p.answer_b.testimony_id);
  }
  std::vector<Testimony> out;
  for (const auto& t : corpus.testimonies) {
    if (wanted.count(t.testimony_id)) out.push_back(t);
  }
  return out;
}

}  // namespace intend::corpus
