#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// The testimony / context-pair data model, its JSONL serialization, corpus
// validation, statistics, and deterministic train/test splitting.
//
// JSONL schema (one record per line, typed by "kind"):
//   {"kind":"testimony","testimony_id":...,"event_id":...,"witness_id":...,
//    "full_text":...,"qa_segments":[{"q":...,"a":...}]}
//   {"kind":"pair","pair_id":...,"context":...,
//    "answer_a":{"text":...,"testimony_id":...},"answer_b":{...},
//    "gold_label":0|1|null,
//    "gold_findings":[{"i":1,"span_a":{"start":..,"end":..,"surface":..},
//                      "span_b":{...}}]}
//
// Offsets are Unicode scalar-value character offsets, half-open [start, end).

namespace intend::corpus {

struct SpanRef {
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive
  std::string surface;

  bool operator==(const SpanRef&) const = default;
};

// Checks 0 <= start < end <= |host| and surface == host[start..end).
// Returns an error description, or empty when the span is valid.
std::string check_span(const SpanRef& span, std::string_view host_text);

struct QaSegment {
  std::string question;
  std::string answer;

  bool operator==(const QaSegment&) const = default;
};

struct Testimony {
  std::string testimony_id;
  std::string event_id;
  std::string witness_id;
  std::string full_text;
  std::vector<QaSegment> qa_segments;

  bool operator==(const Testimony&) const = default;
};

struct AnswerRef {
  std::string text;
  std::string testimony_id;

  bool operator==(const AnswerRef&) const = default;
};

struct GoldFinding {
  int index = 0;  // 1-based, contiguous within a pair
  SpanRef span_a;
  SpanRef span_b;

  bool operator==(const GoldFinding&) const = default;
};

struct ContextPair {
  std::string pair_id;
  std::string context;
  AnswerRef answer_a;
  AnswerRef answer_b;
  std::optional<int> gold_label;  // 1 = incongruent, 0 = not
  std::vector<GoldFinding> gold_findings;

  bool operator==(const ContextPair&) const = default;
};

// Declares how qa_segments relate to full_text.
enum class SchemaMode {
  Substring,      // every answer is a contiguous substring of full_text
  Concatenation,  // full_text equals the concatenation of the answers
};

std::string_view schema_mode_name(SchemaMode mode);
SchemaMode parse_schema_mode(std::string_view name);  // throws ConfigError

struct Corpus {
  std::vector<Testimony> testimonies;
  std::vector<ContextPair> pairs;

  bool operator==(const Corpus&) const = default;
};

// Parses and validates. Malformed lines raise DataError with the line
// number; invariant violations raise ValidationError naming the record.
Corpus load_corpus(const std::filesystem::path& path, SchemaMode mode);
Corpus parse_corpus(std::istream& in, SchemaMode mode,
                    std::string_view source_name = "<stream>");

// Validation alone, for corpora built in memory.
void validate_corpus(const Corpus& corpus, SchemaMode mode);

void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct CorpusStats {
  std::int64_t n_events = 0;
  std::int64_t n_testimonies = 0;
  std::int64_t n_unique_contexts = 0;
  std::int64_t n_pairs = 0;
  std::int64_t n_incongruent = 0;
  std::int64_t n_non_incongruent = 0;  // includes unlabeled pairs
  std::int64_t n_unlabeled = 0;        // subset of n_non_incongruent
  double mean_gold_span_tokens = 0.0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats compute_stats(const Corpus& corpus);

enum class SplitGranularity {
  Pair,   // default: each pair assigned independently
  Event,  // whole events kept together
};

struct SplitResult {
  std::vector<ContextPair> train;
  std::vector<ContextPair> test;
};

// Deterministic for fixed (corpus, fraction, seed). Train size is
// round(train_fraction * n_pairs), half away from zero; with Event
// granularity whole events are taken until that target is reached.
SplitResult split_corpus(const Corpus& corpus, double train_fraction,
                         std::uint64_t seed,
                         SplitGranularity granularity = SplitGranularity::Pair);

// Testimonies referenced by the given pairs, in corpus order. Used when
// writing split outputs so each side stays loadable.
std::vector<Testimony> referenced_testimonies(
    const Corpus& corpus, const std::vector<ContextPair>& pairs);

}  // namespace intend::corpus
