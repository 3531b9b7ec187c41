#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "intend/errors.hpp"
#include "intend/eval.hpp"
#include "intend/metrics.hpp"
#include "intend/pipeline.hpp"
#include "intend/synth.hpp"
#include "../support/oracle_metrics.hpp"
#include "../support/test_util.hpp"

using namespace intend;

namespace {

// A run over a generated corpus with its matched script: the pipeline's
// in-memory detect + reason stages without touching disk.
struct MockRun {
  synth::SynthOutput generated;
  std::vector<detection::DetectionRow> detections;
  std::vector<eval::PairFindings> findings;
};

MockRun scripted_run(int n_pairs, double fraction, std::uint64_t seed) {
  MockRun run;
  run.generated = synth::generate(n_pairs, fraction, seed);
  backend::MockBackend mock(run.generated.mock_script);
  pipeline::RunConfig config;
  config.max_in_flight = 4;
  run.detections = pipeline::detect_corpus(run.generated.corpus, config, mock);
  run.findings = pipeline::reason_corpus(run.generated.corpus, config, mock, std::nullopt);
  return run;
}

}  // namespace

TEST_CASE("a perfect scripted run scores 1.0 everywhere") {
  const auto run = scripted_run(30, 0.6, 91);
  const auto report =
      eval::evaluate(run.detections, run.findings, run.generated.corpus);
  CHECK(report.binary.precision == 1.0);
  CHECK(report.binary.recall == 1.0);
  CHECK(report.binary.f1 == 1.0);
  CHECK(report.counts.fp == 0);
  CHECK(report.counts.fn == 0);
  CHECK(report.span_t1.f1 == 1.0);
  CHECK(report.span_t2.f1 == 1.0);
  CHECK(report.alignment.f1 == 1.0);
  CHECK(report.mean_coverage == 1.0);
  CHECK(report.mean_coverage_per_pair == 1.0);
  CHECK(report.n_span_scored_pairs == report.counts.tp);
}

TEST_CASE("empty predictions score zero recall with the empty-prediction rules") {
  const auto generated = synth::generate(20, 0.5, 17);
  const auto report = eval::evaluate({}, {}, generated.corpus);
  CHECK(report.binary.recall == 0.0);
  CHECK(report.binary.precision == 0.0);
  CHECK(report.counts.fn == generated.manifest.declared.n_incongruent);
  CHECK(report.counts.tn == generated.manifest.declared.n_non_incongruent);
  CHECK(report.counts.missing == static_cast<std::int64_t>(generated.corpus.pairs.size()));
  // Gold-incongruent pairs scored as empty predictions.
  CHECK(report.n_span_scored_pairs == generated.manifest.declared.n_incongruent);
  CHECK(report.span_t1.f1 == 0.0);
  CHECK(report.span_t2.f1 == 0.0);
  CHECK(report.alignment.f1 == 0.0);
  CHECK(report.mean_coverage == 0.0);
  CHECK(report.n_coverage_spans == 0);
}

TEST_CASE("unknown and duplicate prediction ids are rejected") {
  const auto generated = synth::generate(4, 0.5, 23);
  detection::DetectionRow ghost;
  ghost.pair_id = "pair-9999";
  CHECK_THROWS_AS(eval::evaluate({ghost}, {}, generated.corpus), DataError);

  detection::DetectionRow dup;
  dup.pair_id = generated.corpus.pairs[0].pair_id;
  CHECK_THROWS_AS(eval::evaluate({dup, dup}, {}, generated.corpus), DataError);

  eval::PairFindings ghost_findings;
  ghost_findings.pair_id = "pair-9999";
  CHECK_THROWS_AS(eval::evaluate({}, {ghost_findings}, generated.corpus), DataError);
}

TEST_CASE("evaluation is a pure function of its inputs") {
  const auto run = scripted_run(16, 0.5, 3);
  const auto r1 = eval::evaluate(run.detections, run.findings, run.generated.corpus);
  const auto r2 = eval::evaluate(run.detections, run.findings, run.generated.corpus);
  CHECK(eval::report_to_json(r1) == eval::report_to_json(r2));
}

TEST_CASE("undecidable and unlabeled pairs are counted, not silently dropped") {
  auto generated = synth::generate(6, 0.5, 29);
  auto detections = [&] {
    std::vector<detection::DetectionRow> rows;
    for (const auto& pair : generated.corpus.pairs) {
      detection::DetectionRow row;
      row.pair_id = pair.pair_id;
      row.pred = pair.gold_label.value_or(0);
      rows.push_back(row);
    }
    return rows;
  }();
  detections[0].undecidable = true;
  detections[0].pred = 0;
  generated.corpus.pairs[1].gold_label.reset();
  generated.corpus.pairs[1].gold_findings.clear();

  const auto report = eval::evaluate(detections, {}, generated.corpus, {}, true, false);
  CHECK(report.counts.undecidable == 1);
  CHECK(report.counts.unlabeled == 1);
  CHECK(report.counts.tp + report.counts.fp + report.counts.fn + report.counts.tn ==
        static_cast<std::int64_t>(generated.corpus.pairs.size()) - 1);
}

TEST_CASE("aggregates recompute exactly from the per-pair rows") {
  const auto run = scripted_run(25, 0.7, 47);
  // Perturb one finding so the aggregates are not all 1.0.
  auto findings = run.findings;
  for (auto& row : findings) {
    if (!row.findings.empty()) {
      row.findings[0].quote_a = "completely unrelated text";
      row.findings[0].grounded_a.reset();
      break;
    }
  }
  const auto report = eval::evaluate(run.detections, findings, run.generated.corpus);

  double sum_p = 0, sum_r = 0, sum_f = 0;
  std::int64_t n = 0;
  for (const auto& row : report.per_pair) {
    if (!row.span_a.has_value()) continue;
    sum_p += row.span_a->precision;
    sum_r += row.span_a->recall;
    sum_f += row.span_a->f1;
    ++n;
  }
  REQUIRE(n == report.n_span_scored_pairs);
  CHECK(report.span_t1.precision == doctest::Approx(sum_p / n).epsilon(1e-15));
  CHECK(report.span_t1.recall == doctest::Approx(sum_r / n).epsilon(1e-15));
  CHECK(report.span_t1.f1 == doctest::Approx(sum_f / n).epsilon(1e-15));
  CHECK(report.span_t1.f1 < 1.0);
}

TEST_CASE("randomized stress run matches an independent rescoring") {
  testutil::WordSoup soup(2024);
  const auto generated = synth::generate(300, 0.6, 6060);
  const auto& corpus_data = generated.corpus;

  // Random findings: sometimes gold-derived, sometimes noise, sometimes none.
  std::vector<eval::PairFindings> findings;
  for (const auto& pair : corpus_data.pairs) {
    eval::PairFindings row;
    row.pair_id = pair.pair_id;
    const auto dice = soup.below(4);
    if (dice == 0) {
      findings.push_back(row);
      continue;
    }
    int index = 0;
    for (const auto& gold : pair.gold_findings) {
      reasoning::ContradictionFinding f;
      f.index = ++index;
      f.quote_a = dice == 1 ? gold.span_a.surface
                            : testutil::WordSoup::join(soup.words(1, 8));
      f.quote_b = dice == 2 ? gold.span_b.surface
                            : testutil::WordSoup::join(soup.words(1, 8));
      f.coverage_a = metrics::coverage(f.quote_a, pair.answer_a.text);
      f.coverage_b = metrics::coverage(f.quote_b, pair.answer_b.text);
      row.findings.push_back(std::move(f));
    }
    if (dice == 3) {
      reasoning::ContradictionFinding extra;
      extra.index = ++index;
      extra.quote_a = testutil::WordSoup::join(soup.words(1, 6));
      extra.quote_b = testutil::WordSoup::join(soup.words(1, 6));
      extra.coverage_a = metrics::coverage(extra.quote_a, pair.answer_a.text);
      extra.coverage_b = metrics::coverage(extra.quote_b, pair.answer_b.text);
      row.findings.push_back(std::move(extra));
    }
    findings.push_back(std::move(row));
  }

  const auto report = eval::evaluate({}, findings, corpus_data, {}, false, true);

  // Independent rescoring of the span macro averages.
  const auto tokens_of = [](const std::string& text) {
    oracle::Tokens toks;
    for (const auto& t : metrics::tokenize_spans(text)) toks.push_back(t.norm);
    return toks;
  };
  double sum_a_f1 = 0, sum_align_f1 = 0, coverage_sum = 0;
  std::int64_t scored = 0, n_spans = 0;
  std::map<std::string, const eval::PairFindings*> by_id;
  for (const auto& row : findings) by_id[row.pair_id] = &row;
  for (const auto& pair : corpus_data.pairs) {
    const auto* row = by_id.count(pair.pair_id) ? by_id[pair.pair_id] : nullptr;
    if (row != nullptr) {
      for (const auto& f : row->findings) {
        coverage_sum += oracle::coverage(tokens_of(f.quote_a), tokens_of(pair.answer_a.text));
        coverage_sum += oracle::coverage(tokens_of(f.quote_b), tokens_of(pair.answer_b.text));
        n_spans += 2;
      }
    }
    if (pair.gold_label != 1) continue;
    std::vector<oracle::Tokens> pred_a, gold_a;
    std::vector<oracle::FindingTokens> pred_pairs, gold_pairs;
    if (row != nullptr) {
      for (const auto& f : row->findings) {
        const std::string text_a = f.grounded_a ? f.grounded_a->surface : f.quote_a;
        const std::string text_b = f.grounded_b ? f.grounded_b->surface : f.quote_b;
        pred_a.push_back(tokens_of(text_a));
        pred_pairs.push_back({tokens_of(text_a), tokens_of(text_b)});
      }
    }
    for (const auto& g : pair.gold_findings) {
      gold_a.push_back(tokens_of(g.span_a.surface));
      gold_pairs.push_back({tokens_of(g.span_a.surface), tokens_of(g.span_b.surface)});
    }
    sum_a_f1 += oracle::pooled_span_prf(pred_a, gold_a).f1;
    sum_align_f1 += oracle::alignment_prf(pred_pairs, gold_pairs, 0.5).f1;
    ++scored;
  }
  REQUIRE(scored == report.n_span_scored_pairs);
  CHECK(std::abs(report.span_t1.f1 - sum_a_f1 / scored) <= 1e-12);
  CHECK(std::abs(report.alignment.f1 - sum_align_f1 / scored) <= 1e-12);
  CHECK(report.n_coverage_spans == n_spans);
  if (n_spans > 0) {
    CHECK(std::abs(report.mean_coverage - coverage_sum / n_spans) <= 1e-12);
  }
}

TEST_CASE("findings rows round trip through JSONL") {
  const auto run = scripted_run(10, 0.6, 55);
  testutil::TempDir dir("eval-rt");
  {
    std::ofstream out(dir.path() / "f.jsonl");
    for (const auto& row : run.findings) {
      out << eval::pair_findings_to_jsonl(row) << "\n";
    }
  }
  const auto reloaded = eval::load_findings(dir.path() / "f.jsonl");
  REQUIRE(reloaded.size() == run.findings.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    CHECK(reloaded[i].pair_id == run.findings[i].pair_id);
    CHECK(reloaded[i].short_circuited == run.findings[i].short_circuited);
    REQUIRE(reloaded[i].findings.size() == run.findings[i].findings.size());
    for (std::size_t f = 0; f < reloaded[i].findings.size(); ++f) {
      CHECK(reloaded[i].findings[f].quote_a == run.findings[i].findings[f].quote_a);
      CHECK(reloaded[i].findings[f].grounded_a == run.findings[i].findings[f].grounded_a);
      CHECK(reloaded[i].findings[f].coverage_b ==
            run.findings[i].findings[f].coverage_b);
      CHECK(reloaded[i].findings[f].rationale == run.findings[i].findings[f].rationale);
    }
  }
}

TEST_CASE("report json and table rendering") {
  const auto run = scripted_run(8, 0.5, 61);
  const auto report = eval::evaluate(run.detections, run.findings, run.generated.corpus);
  testutil::TempDir dir("eval-render");
  eval::write_report(report, dir.path() / "report.json");
  const auto table = eval::render_report_table(dir.path() / "report.json");
  CHECK(table.find("Span Identification") != std::string::npos);
  CHECK(table.find("Incongruence Alignment") != std::string::npos);
  CHECK(table.find("Testimony T1") != std::string::npos);
  CHECK(table.find("Binary detection") != std::string::npos);
  CHECK(table.find("1.000") != std::string::npos);
}
