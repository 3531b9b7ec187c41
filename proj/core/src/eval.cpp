#include "intend/eval.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "intend/errors.hpp"

namespace intend::eval {

using nlohmann::json;

namespace {

json span_json(const std::optional<corpus::SpanRef>& span) {
  if (!span) return nullptr;
  return json{{"start", span->start}, {"end", span->end}, {"surface", span->surface}};
}

std::optional<corpus::SpanRef> span_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  corpus::SpanRef span;
  span.start = j.at("start").get<std::int64_t>();
  span.end = j.at("end").get<std::int64_t>();
  span.surface = j.at("surface").get<std::string>();
  return span;
}

}  // namespace

std::string pair_findings_to_jsonl(const PairFindings& row) {
  json findings = json::array();
  for (const auto& f : row.findings) {
    findings.push_back({{"index", f.index},
                        {"quote_a", f.quote_a},
                        {"quote_b", f.quote_b},
                        {"grounded_a", span_json(f.grounded_a)},
                        {"grounded_b", span_json(f.grounded_b)},
                        {"coverage_a", f.coverage_a},
                        {"coverage_b", f.coverage_b},
                        {"rationale", f.rationale}});
  }
  json j{{"pair_id", row.pair_id},
         {"short_circuited", row.short_circuited},
         {"skipped_blocks", row.skipped_blocks},
         {"findings", findings}};
  if (row.error) j["error"] = *row.error;
  return j.dump();
}

std::vector<PairFindings> load_findings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open findings file: " + path.string());
  std::vector<PairFindings> rows;
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
                      ": malformed findings line: " + e.what());
    }
    PairFindings row;
    row.pair_id = j.at("pair_id").get<std::string>();
    row.short_circuited = j.value("short_circuited", false);
    row.skipped_blocks = j.value("skipped_blocks", 0);
    if (j.contains("error") && !j.at("error").is_null()) {
      row.error = j.at("error").get<std::string>();
    }
    if (const auto fs = j.find("findings"); fs != j.end() && fs->is_array()) {
      for (const auto& f : *fs) {
        reasoning::ContradictionFinding finding;
        finding.index = f.at("index").get<int>();
        finding.quote_a = f.at("quote_a").get<std::string>();
        finding.quote_b = f.at("quote_b").get<std::string>();
        finding.grounded_a = span_from_json(f.value("grounded_a", json()));
        finding.grounded_b = span_from_json(f.value("grounded_b", json()));
        finding.coverage_a = f.value("coverage_a", 0.0);
        finding.coverage_b = f.value("coverage_b", 0.0);
        finding.rationale = f.value("rationale", "");
        row.findings.push_back(std::move(finding));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Text a predicted finding contributes on one side: the grounded surface
// when grounding succeeded, else the raw generated quote.
const std::string& side_text(const reasoning::ContradictionFinding& f, bool side_a) {
  if (side_a) return f.grounded_a ? f.grounded_a->surface : f.quote_a;
  return f.grounded_b ? f.grounded_b->surface : f.quote_b;
}

double safe_mean(double sum, std::int64_t n) {
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

EvalReport evaluate(const std::vector<detection::DetectionRow>& detections,
                    const std::vector<PairFindings>& findings,
                    const corpus::Corpus& gold, const EvalOptions& opts,
                    bool has_detections, bool has_findings) {
  EvalReport report;
  report.options = opts;
  report.has_detections = has_detections;
  report.has_findings = has_findings;

  std::unordered_map<std::string, const corpus::ContextPair*> gold_by_id;
  for (const auto& p : gold.pairs) gold_by_id[p.pair_id] = &p;

  std::unordered_map<std::string, const detection::DetectionRow*> det_by_id;
  for (const auto& d : detections) {
    if (gold_by_id.find(d.pair_id) == gold_by_id.end()) {
      throw DataError("detections mention unknown pair_id " + d.pair_id);
    }
    if (!det_by_id.emplace(d.pair_id, &d).second) {
      throw DataError("duplicate detection for pair_id " + d.pair_id);
    }
  }
  std::unordered_map<std::string, const PairFindings*> find_by_id;
  for (const auto& f : findings) {
    if (gold_by_id.find(f.pair_id) == gold_by_id.end()) {
      throw DataError("findings mention unknown pair_id " + f.pair_id);
    }
    if (!find_by_id.emplace(f.pair_id, &f).second) {
      throw DataError("duplicate findings record for pair_id " + f.pair_id);
    }
  }

  double span_a_p = 0, span_a_r = 0, span_a_f = 0;
  double span_b_p = 0, span_b_r = 0, span_b_f = 0;
  double align_p = 0, align_r = 0, align_f = 0;
  double coverage_sum = 0;
  double pair_mean_sum = 0;
  std::int64_t pair_mean_count = 0;

  static const std::vector<reasoning::ContradictionFinding> kNoFindings;

  for (const auto& pair : gold.pairs) {
    PerPairRow row;
    row.pair_id = pair.pair_id;
    row.gold_label = pair.gold_label;
    row.n_gold_findings = static_cast<int>(pair.gold_findings.size());

    if (has_detections) {
      const auto det = det_by_id.find(pair.pair_id);
      if (det != det_by_id.end()) {
        row.pred = det->second->pred;
        row.undecidable = det->second->undecidable;
      }
      if (!pair.gold_label.has_value()) {
        ++report.counts.unlabeled;
      } else {
        int pred = 0;
        if (det == det_by_id.end()) {
          ++report.counts.missing;
        } else {
          pred = det->second->pred;
          if (det->second->undecidable) ++report.counts.undecidable;
        }
        const int label = *pair.gold_label;
        if (pred == 1 && label == 1) ++report.counts.tp;
        if (pred == 1 && label == 0) ++report.counts.fp;
        if (pred == 0 && label == 1) ++report.counts.fn;
        if (pred == 0 && label == 0) ++report.counts.tn;
      }
    }

    if (has_findings) {
      const auto fit = find_by_id.find(pair.pair_id);
      const auto& pred_findings =
          fit != find_by_id.end() ? fit->second->findings : kNoFindings;
      row.n_pred_findings = static_cast<int>(pred_findings.size());

      for (const auto& f : pred_findings) {
        row.coverages.push_back(f.coverage_a);
        row.coverages.push_back(f.coverage_b);
      }
      if (!row.coverages.empty()) {
        double s = 0;
        for (const double c : row.coverages) s += c;
        coverage_sum += s;
        report.n_coverage_spans += static_cast<std::int64_t>(row.coverages.size());
        pair_mean_sum += s / static_cast<double>(row.coverages.size());
        ++pair_mean_count;
      }

      if (pair.gold_label == 1) {
        std::vector<std::string> pred_a, pred_b, gold_a, gold_b;
        std::vector<metrics::SpanPair> pred_pairs, gold_pairs;
        for (const auto& f : pred_findings) {
          pred_a.push_back(side_text(f, true));
          pred_b.push_back(side_text(f, false));
          pred_pairs.push_back({side_text(f, true), side_text(f, false)});
        }
        for (const auto& g : pair.gold_findings) {
          gold_a.push_back(g.span_a.surface);
          gold_b.push_back(g.span_b.surface);
          gold_pairs.push_back({g.span_a.surface, g.span_b.surface});
        }
        row.span_a = metrics::span_prf_for_pair(pred_a, gold_a);
        row.span_b = metrics::span_prf_for_pair(pred_b, gold_b);
        row.alignment =
            metrics::alignment_prf(pred_pairs, gold_pairs, opts.align_threshold);
        span_a_p += row.span_a->precision;
        span_a_r += row.span_a->recall;
        span_a_f += row.span_a->f1;
        span_b_p += row.span_b->precision;
        span_b_r += row.span_b->recall;
        span_b_f += row.span_b->f1;
        align_p += row.alignment->precision;
        align_r += row.alignment->recall;
        align_f += row.alignment->f1;
        ++report.n_span_scored_pairs;
      }
    }

    if (row.pred.has_value() || row.span_a.has_value() || !row.coverages.empty() ||
        (has_detections && pair.gold_label.has_value()) ||
        (has_findings && pair.gold_label == 1)) {
      report.per_pair.push_back(std::move(row));
    }
  }

  if (has_detections) {
    const auto& c = report.counts;
    const std::int64_t pred_pos = c.tp + c.fp;
    const std::int64_t gold_pos = c.tp + c.fn;
    report.binary.precision =
        pred_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(pred_pos) : 0.0;
    report.binary.recall =
        gold_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(gold_pos) : 0.0;
    report.binary.f1 = metrics::f1_of(report.binary.precision, report.binary.recall);
  }
  if (has_findings) {
    const auto n = report.n_span_scored_pairs;
    report.span_t1 = {safe_mean(span_a_p, n), safe_mean(span_a_r, n), safe_mean(span_a_f, n)};
    report.span_t2 = {safe_mean(span_b_p, n), safe_mean(span_b_r, n), safe_mean(span_b_f, n)};
    report.alignment = {safe_mean(align_p, n), safe_mean(align_r, n), safe_mean(align_f, n)};
    report.mean_coverage = safe_mean(coverage_sum, report.n_coverage_spans);
    report.mean_coverage_per_pair = safe_mean(pair_mean_sum, pair_mean_count);
  }
  return report;
}

namespace {

json prf_json(const metrics::Prf& prf) {
  return json{{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

}  // namespace

std::string report_to_json(const EvalReport& report, int indent) {
  json per_pair = json::array();
  for (const auto& row : report.per_pair) {
    json j{{"pair_id", row.pair_id},
           {"gold_label", row.gold_label ? json(*row.gold_label) : json(nullptr)},
           {"pred", row.pred ? json(*row.pred) : json(nullptr)},
           {"undecidable", row.undecidable},
           {"n_pred_findings", row.n_pred_findings},
           {"n_gold_findings", row.n_gold_findings}};
    if (row.span_a) j["span_a"] = prf_json(*row.span_a);
    if (row.span_b) j["span_b"] = prf_json(*row.span_b);
    if (row.alignment) j["alignment"] = prf_json(*row.alignment);
    if (!row.coverages.empty()) j["coverages"] = row.coverages;
    per_pair.push_back(std::move(j));
  }

  json j{{"metadata",
          {{"align_threshold", report.options.align_threshold},
           {"span_scoring",
            "pooled token bags per side, macro-averaged over gold-incongruent pairs"},
           {"coverage_averaging", "per predicted span; per-pair mean reported alongside"},
           {"has_detections", report.has_detections},
           {"has_findings", report.has_findings}}},
         {"per_pair", per_pair}};
  if (report.has_detections) {
    j["binary"] = prf_json(report.binary);
    j["binary"]["tp"] = report.counts.tp;
    j["binary"]["fp"] = report.counts.fp;
    j["binary"]["fn"] = report.counts.fn;
    j["binary"]["tn"] = report.counts.tn;
    j["binary"]["undecidable"] = report.counts.undecidable;
    j["binary"]["unlabeled"] = report.counts.unlabeled;
    j["binary"]["missing"] = report.counts.missing;
  }
  if (report.has_findings) {
    j["span_t1"] = prf_json(report.span_t1);
    j["span_t2"] = prf_json(report.span_t2);
    j["alignment"] = prf_json(report.alignment);
    j["n_span_scored_pairs"] = report.n_span_scored_pairs;
    j["mean_coverage"] = report.mean_coverage;
    j["n_coverage_spans"] = report.n_coverage_spans;
    j["mean_coverage_per_pair"] = report.mean_coverage_per_pair;
  }
  return j.dump(indent);
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path.string());
  out << report_to_json(report) << "\n";
}

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void render_prf_row(std::ostringstream& out, const std::string& label,
                    const json& a, const json& b, const json& align) {
  const auto cell = [](const json& j) {
    return fmt3(j.at("precision").get<double>()) + "  " +
           fmt3(j.at("recall").get<double>()) + "  " + fmt3(j.at("f1").get<double>());
  };
  out << label;
  if (static_cast<int>(label.size()) < 12) out << std::string(12 - label.size(), ' ');
  out << cell(a) << "   " << cell(b) << "   " << cell(align) << "\n";
}

}  // namespace

std::string render_report_table(const std::filesystem::path& report_json_path) {
  std::ifstream in(report_json_path);
  if (!in) throw DataError("cannot open report file: " + report_json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(report_json_path.string() + ": malformed report JSON: " + e.what());
  }

  std::ostringstream out;
  if (j.contains("span_t1")) {
    out << "                     Span Identification                    Incongruence Alignment\n";
    out << "            Testimony T1           Testimony T2             between T1 & T2\n";
    out << "            Pre    Rec    F1       Pre    Rec    F1         Pre    Rec    F1\n";
    render_prf_row(out, "  spans", j.at("span_t1"), j.at("span_t2"), j.at("alignment"));
    out << "\n";
    out << "  mean coverage over " << j.at("n_coverage_spans").get<std::int64_t>()
        << " predicted span(s): " << fmt3(j.at("mean_coverage").get<double>())
        << " (per-pair mean " << fmt3(j.at("mean_coverage_per_pair").get<double>())
        << ")\n";
    out << "  gold-incongruent pairs scored: "
        << j.at("n_span_scored_pairs").get<std::int64_t>() << "\n";
  }
  if (j.contains("binary")) {
    const auto& b = j.at("binary");
    out << "\n  Binary detection\n";
    out << "    Pre " << fmt3(b.at("precision").get<double>()) << "  Rec "
        << fmt3(b.at("recall").get<double>()) << "  F1 " << fmt3(b.at("f1").get<double>())
        << "\n";
    out << "    TP " << b.at("tp").get<std::int64_t>() << "  FP "
        << b.at("fp").get<std::int64_t>() << "  FN " << b.at("fn").get<std::int64_t>()
        << "  TN " << b.at("tn").get<std::int64_t>() << "  undecidable "
        << b.at("undecidable").get<std::int64_t>() << "  unlabeled "
        << b.at("unlabeled").get<std::int64_t>() << "  missing "
        << b.at("missing").get<std::int64_t>() << "\n";
  }
  return out.str();
}

}  // namespace intend::eval
