#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "intend/corpus.hpp"
#include "intend/errors.hpp"
#include "intend/synth.hpp"
#include "../support/test_util.hpp"

using namespace intend;

namespace {

// Minimal two-testimony scaffold for hand-built pairs.
corpus::Corpus scaffold(int n_pairs) {
  corpus::Corpus c;
  c.testimonies.push_back({"t1", "ev1", "w1", "first account text", {}});
  c.testimonies.push_back({"t2", "ev1", "w2", "second account text", {}});
  for (int i = 0; i < n_pairs; ++i) {
    corpus::ContextPair p;
    p.pair_id = "p" + std::to_string(i);
    p.context = "what happened?";
    p.answer_a = {"answer a " + std::to_string(i), "t1"};
    p.answer_b = {"answer b " + std::to_string(i), "t2"};
    p.gold_label = 0;
    c.pairs.push_back(std::move(p));
  }
  return c;
}

}  // namespace

TEST_CASE("empty file loads to an empty corpus with zero stats") {
  std::istringstream in("");
  const auto c = corpus::parse_corpus(in, corpus::SchemaMode::Substring);
  CHECK(c.testimonies.empty());
  CHECK(c.pairs.empty());
  const auto stats = corpus::compute_stats(c);
  CHECK(stats.n_pairs == 0);
  CHECK(stats.n_events == 0);
  CHECK(stats.n_incongruent == 0);
  CHECK(stats.mean_gold_span_tokens == 0.0);
}

TEST_CASE("the bundled fixture corpus loads cleanly") {
  const auto c = corpus::load_corpus(testutil::data_dir() / "fixture_corpus.jsonl",
                                     corpus::SchemaMode::Substring);
  CHECK(c.pairs.size() == 12);
  CHECK(c.testimonies.size() == 4);

  const auto stats = corpus::compute_stats(c);
  CHECK(stats.n_pairs == 12);
  CHECK(stats.n_incongruent == 6);
  CHECK(stats.n_non_incongruent == 6);
  CHECK(stats.n_events == 2);
  CHECK(stats.n_unique_contexts == 12);
  CHECK(stats.n_unlabeled == 0);
  CHECK(stats.mean_gold_span_tokens > 0.0);
}

TEST_CASE("span surface mismatch is a validation error naming the pair") {
  auto c = scaffold(1);
  c.pairs[0].gold_label = 1;
  c.pairs[0].gold_findings.push_back(
      {1, {0, 6, "wrongy"}, {0, 6, "answer"}});
  try {
    corpus::validate_corpus(c, corpus::SchemaMode::Substring);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("p0") != std::string::npos);
    CHECK(what.find("surface") != std::string::npos);
  }
}

TEST_CASE("span offsets count codepoints, not bytes") {
  auto c = scaffold(1);
  c.pairs[0].answer_a.text = "le café brûlé";
  c.pairs[0].gold_label = 1;
  // "café" covers codepoints [3,7) even though é is two bytes.
  c.pairs[0].gold_findings.push_back({1, {3, 7, "café"}, {0, 6, "answer"}});
  CHECK_NOTHROW(corpus::validate_corpus(c, corpus::SchemaMode::Substring));
}

TEST_CASE("malformed JSON lines carry the line number") {
  std::istringstream in(
      "{\"kind\":\"testimony\",\"testimony_id\":\"t1\",\"event_id\":\"e\","
      "\"witness_id\":\"w\",\"full_text\":\"x\"}\nnot json\n");
  try {
    corpus::parse_corpus(in, corpus::SchemaMode::Substring, "test.jsonl");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("test.jsonl:2") != std::string::npos);
  }
}

TEST_CASE("record-level schema violations are rejected") {
  const auto load = [](const std::string& body) {
    std::istringstream in(body);
    return corpus::parse_corpus(in, corpus::SchemaMode::Substring);
  };
  CHECK_THROWS_AS(load("{\"kind\":\"mystery\"}"), DataError);
  CHECK_THROWS_AS(load("{\"kind\":\"testimony\",\"testimony_id\":\"t\"}"), DataError);
  CHECK_THROWS_AS(load("[1,2,3]"), DataError);
  CHECK_THROWS_AS(
      load("{\"kind\":\"pair\",\"pair_id\":\"p\",\"context\":\"c\","
           "\"answer_a\":{\"text\":\"a\",\"testimony_id\":\"t1\"},"
           "\"answer_b\":{\"text\":\"b\",\"testimony_id\":\"t2\"},"
           "\"gold_label\":7}"),
      DataError);
}

TEST_CASE("corpus invariants are enforced") {
  SUBCASE("duplicate testimony ids") {
    corpus::Corpus c;
    c.testimonies.push_back({"t1", "ev1", "w1", "text", {}});
    c.testimonies.push_back({"t1", "ev1", "w2", "text", {}});
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);
  }
  SUBCASE("blank full_text") {
    corpus::Corpus c;
    c.testimonies.push_back({"t1", "ev1", "w1", "  \n ", {}});
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);
  }
  SUBCASE("answers must come from two testimonies of one event") {
    auto c = scaffold(1);
    c.pairs[0].answer_b.testimony_id = "t1";
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);

    auto c2 = scaffold(1);
    c2.testimonies[1].event_id = "ev2";
    CHECK_THROWS_AS(corpus::validate_corpus(c2, corpus::SchemaMode::Substring),
                    ValidationError);

    auto c3 = scaffold(1);
    c3.pairs[0].answer_b.testimony_id = "missing";
    CHECK_THROWS_AS(corpus::validate_corpus(c3, corpus::SchemaMode::Substring),
                    ValidationError);
  }
  SUBCASE("findings imply the incongruent label") {
    auto c = scaffold(1);
    c.pairs[0].gold_label = 0;
    c.pairs[0].gold_findings.push_back({1, {0, 6, "answer"}, {0, 6, "answer"}});
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);

    auto c2 = scaffold(1);
    c2.pairs[0].gold_label.reset();
    c2.pairs[0].gold_findings.push_back({1, {0, 6, "answer"}, {0, 6, "answer"}});
    CHECK_THROWS_AS(corpus::validate_corpus(c2, corpus::SchemaMode::Substring),
                    ValidationError);
  }
  SUBCASE("finding indices contiguous from 1") {
    auto c = scaffold(1);
    c.pairs[0].gold_label = 1;
    c.pairs[0].gold_findings.push_back({2, {0, 6, "answer"}, {0, 6, "answer"}});
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);
  }
  SUBCASE("qa segments against the declared mode") {
    corpus::Corpus c;
    c.testimonies.push_back({"t1", "ev1", "w1", "one two", {{"q", "three"}}});
    CHECK_THROWS_AS(corpus::validate_corpus(c, corpus::SchemaMode::Substring),
                    ValidationError);

    corpus::Corpus c2;
    c2.testimonies.push_back({"t1", "ev1", "w1", "onetwo", {{"q1", "one"}, {"q2", "two"}}});
    CHECK_NOTHROW(corpus::validate_corpus(c2, corpus::SchemaMode::Concatenation));
    c2.testimonies[0].full_text = "one two";
    CHECK_THROWS_AS(corpus::validate_corpus(c2, corpus::SchemaMode::Concatenation),
                    ValidationError);
  }
}

TEST_CASE("write/load round trip reproduces the corpus structurally") {
  const auto original = corpus::load_corpus(
      testutil::data_dir() / "fixture_corpus.jsonl", corpus::SchemaMode::Substring);
  std::ostringstream out;
  corpus::write_corpus(original, out);
  std::istringstream in(out.str());
  const auto reloaded = corpus::parse_corpus(in, corpus::SchemaMode::Substring);
  CHECK(reloaded == original);
}

TEST_CASE("generated corpora round trip too") {
  const auto generated = synth::generate(25, 0.6, 99);
  std::ostringstream out;
  corpus::write_corpus(generated.corpus, out);
  std::istringstream in(out.str());
  const auto reloaded = corpus::parse_corpus(in, corpus::SchemaMode::Substring);
  CHECK(reloaded == generated.corpus);
}

TEST_CASE("stats on a single non-incongruent pair") {
  const auto c = scaffold(1);
  const auto stats = corpus::compute_stats(c);
  CHECK(stats.n_pairs == 1);
  CHECK(stats.n_incongruent == 0);
  CHECK(stats.n_non_incongruent == 1);
  CHECK(stats.mean_gold_span_tokens == 0.0);
}

TEST_CASE("unlabeled pairs count toward the non-incongruent bucket") {
  auto c = scaffold(3);
  c.pairs[1].gold_label.reset();
  const auto stats = corpus::compute_stats(c);
  CHECK(stats.n_pairs == 3);
  CHECK(stats.n_unlabeled == 1);
  CHECK(stats.n_incongruent + stats.n_non_incongruent == stats.n_pairs);
}

TEST_CASE("split is deterministic, exhaustive, and disjoint") {
  const auto c = scaffold(101);
  const auto s1 = corpus::split_corpus(c, 0.65, 7);
  const auto s2 = corpus::split_corpus(c, 0.65, 7);
  CHECK(s1.train == s2.train);
  CHECK(s1.test == s2.test);

  CHECK(s1.train.size() + s1.test.size() == c.pairs.size());
  std::set<std::string> seen;
  for (const auto& p : s1.train) CHECK(seen.insert(p.pair_id).second);
  for (const auto& p : s1.test) CHECK(seen.insert(p.pair_id).second);
  CHECK(seen.size() == c.pairs.size());

  const auto other_seed = corpus::split_corpus(c, 0.65, 8);
  CHECK(other_seed.train != s1.train);  // astronomically unlikely to collide
}

TEST_CASE("train size follows round-half-away-from-zero") {
  // round(0.65 * 2987) = round(1941.55) = 1942
  const auto big = scaffold(2987);
  const auto split = corpus::split_corpus(big, 0.65, 3);
  CHECK(split.train.size() == 1942);
  CHECK(split.test.size() == 2987 - 1942);

  // round(0.5 * 101) = round(50.5) = 51, half away from zero
  const auto odd = scaffold(101);
  CHECK(corpus::split_corpus(odd, 0.5, 1).train.size() == 51);
}

TEST_CASE("split determinism and partition hold across seeds and fractions") {
  const auto c = scaffold(57);
  for (const double fraction : {0.1, 0.35, 0.5, 0.65, 0.9}) {
    for (const std::uint64_t seed : {0ull, 1ull, 99ull, 123456789ull}) {
      const auto s1 = corpus::split_corpus(c, fraction, seed);
      const auto s2 = corpus::split_corpus(c, fraction, seed);
      CHECK(s1.train == s2.train);
      CHECK(s1.test == s2.test);
      CHECK(s1.train.size() + s1.test.size() == c.pairs.size());
      const auto target = static_cast<std::size_t>(
          std::llround(fraction * static_cast<double>(c.pairs.size())));
      CHECK(s1.train.size() == target);
      std::set<std::string> seen;
      for (const auto& p : s1.train) CHECK(seen.insert(p.pair_id).second);
      for (const auto& p : s1.test) CHECK(seen.insert(p.pair_id).second);
    }
  }
}

TEST_CASE("split rejects bad fractions and tiny corpora") {
  const auto c = scaffold(10);
  CHECK_THROWS_AS(corpus::split_corpus(c, 1.5, 1), ConfigError);
  CHECK_THROWS_AS(corpus::split_corpus(c, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(corpus::split_corpus(c, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(corpus::split_corpus(scaffold(1), 0.5, 1), DataError);
}

TEST_CASE("event-granular split keeps whole events together") {
  const auto generated = synth::generate(30, 0.5, 11);
  const auto& c = generated.corpus;
  const auto split =
      corpus::split_corpus(c, 0.5, 21, corpus::SplitGranularity::Event);

  std::map<std::string, std::string> event_of;
  for (const auto& t : c.testimonies) event_of[t.testimony_id] = t.event_id;
  std::set<std::string> train_events, test_events;
  for (const auto& p : split.train) train_events.insert(event_of[p.answer_a.testimony_id]);
  for (const auto& p : split.test) test_events.insert(event_of[p.answer_a.testimony_id]);
  for (const auto& ev : train_events) CHECK(test_events.count(ev) == 0);
  CHECK(split.train.size() + split.test.size() == c.pairs.size());
}

TEST_CASE("referenced_testimonies keeps split outputs loadable") {
  const auto generated = synth::generate(12, 0.5, 5);
  const auto split = corpus::split_corpus(generated.corpus, 0.5, 2);
  corpus::Corpus train{corpus::referenced_testimonies(generated.corpus, split.train),
                       split.train};
  CHECK_NOTHROW(corpus::validate_corpus(train, corpus::SchemaMode::Substring));
}

TEST_CASE("gold surfaces equal their host slice on generated corpora") {
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto generated = synth::generate(20, 0.7, seed);
    for (const auto& p : generated.corpus.pairs) {
      for (const auto& f : p.gold_findings) {
        CHECK(corpus::check_span(f.span_a, p.answer_a.text).empty());
        CHECK(corpus::check_span(f.span_b, p.answer_b.text).empty());
      }
    }
  }
}
