#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "intend/corpus.hpp"
#include "intend/detection.hpp"
#include "intend/metrics.hpp"
#include "intend/reasoning.hpp"

// Report assembly: joins detection rows and per-pair findings against the
// gold corpus and aggregates binary, span, alignment, and coverage scores.
//
// Conventions (also flagged in the report metadata):
//  - span scores pool all spans of one side into a single bag per pair, then
//    macro-average over gold-incongruent pairs;
//  - coverage averages over predicted spans, with a per-pair mean alongside;
//  - when a predictions input is given, gold pairs it does not mention are
//    scored as empty predictions.

namespace intend::eval {

// findings.jsonl: one record per processed pair.
// {"pair_id":..,"short_circuited":bool,"skipped_blocks":n,"error":str?,
//  "findings":[{"index":..,"quote_a":..,"quote_b":..,
//               "grounded_a":{"start","end","surface"}|null,"grounded_b":..,
//               "coverage_a":..,"coverage_b":..,"rationale":..}]}
struct PairFindings {
  std::string pair_id;
  bool short_circuited = false;
  int skipped_blocks = 0;
  std::optional<std::string> error;
  std::vector<reasoning::ContradictionFinding> findings;
};

std::string pair_findings_to_jsonl(const PairFindings& row);
std::vector<PairFindings> load_findings(const std::filesystem::path& path);

struct EvalOptions {
  double align_threshold = 0.5;
};

struct BinaryCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  std::int64_t undecidable = 0;
  std::int64_t unlabeled = 0;  // pairs without a gold label, skipped
  std::int64_t missing = 0;    // labeled pairs absent from the detections input
};

struct PerPairRow {
  std::string pair_id;
  std::optional<int> gold_label;
  std::optional<int> pred;
  bool undecidable = false;
  std::optional<metrics::Prf> span_a;
  std::optional<metrics::Prf> span_b;
  std::optional<metrics::Prf> alignment;
  std::vector<double> coverages;  // per predicted span, sides interleaved
  int n_pred_findings = 0;
  int n_gold_findings = 0;
};

struct EvalReport {
  bool has_detections = false;
  bool has_findings = false;
  metrics::Prf binary;
  BinaryCounts counts;
  metrics::Prf span_t1;
  metrics::Prf span_t2;
  metrics::Prf alignment;
  std::int64_t n_span_scored_pairs = 0;  // gold-incongruent pairs scored
  double mean_coverage = 0.0;            // over all predicted spans
  std::int64_t n_coverage_spans = 0;
  double mean_coverage_per_pair = 0.0;   // mean of per-pair means
  EvalOptions options;
  std::vector<PerPairRow> per_pair;
};

// Throws DataError on unknown pair ids or duplicate predictions for a pair.
EvalReport evaluate(const std::vector<detection::DetectionRow>& detections,
                    const std::vector<PairFindings>& findings,
                    const corpus::Corpus& gold, const EvalOptions& opts = {},
                    bool has_detections = true, bool has_findings = true);

std::string report_to_json(const EvalReport& report, int indent = 2);
void write_report(const EvalReport& report, const std::filesystem::path& path);

// Renders the stored report as a fixed-width table: span identification per
// testimony plus alignment between them, then the binary block and coverage.
std::string render_report_table(const std::filesystem::path& report_json_path);

}  // namespace intend::eval
