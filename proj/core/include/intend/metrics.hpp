#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

// Scoring primitives for both tasks: the shared tokenizer, token-overlap
// precision/recall/F1 in the SQuAD multiset convention, the span coverage
// ratio, pooled per-side span scores, and bipartite alignment matching.

namespace intend::metrics {

// A normalized token together with its codepoint extent in the source text.
struct Token {
  std::string norm;
  std::size_t cp_begin = 0;
  std::size_t cp_end = 0;  // exclusive
};

// Normalization: casefold + compatibility fold, whitespace-delimited, then
// surrounding punctuation stripped per token. Interior punctuation survives,
// so "He's" tokenizes to "he's". Tokens empty after stripping are dropped.
std::vector<Token> tokenize_spans(std::string_view text);

// Multiset of normalized tokens.
class TokenBag {
 public:
  TokenBag() = default;

  void add(std::string token);
  int size() const { return total_; }
  bool empty() const { return total_ == 0; }
  int count(const std::string& token) const;
  int intersection_size(const TokenBag& other) const;
  const std::map<std::string, int>& counts() const { return counts_; }

  bool operator==(const TokenBag&) const = default;

 private:
  std::map<std::string, int> counts_;
  int total_ = 0;
};

TokenBag tokenize(std::string_view text);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Prf&) const = default;
};

double f1_of(double precision, double recall);

// Multiset-intersection P/R/F1. Both bags empty scores (1,1,1); exactly one
// empty scores (0,0,0).
Prf token_prf(const TokenBag& predicted, const TokenBag& gold);

// token_prf(tokenize(a), tokenize(b)).f1
double token_f1(std::string_view a, std::string_view b);

// Fraction of the predicted span's tokens that occur in the testimony
// (multiset-capped). Empty predicted span scores 0.
double coverage(std::string_view predicted_span, std::string_view testimony);

// Pools every span on one side into a single bag per system and scores
// token_prf. No gold and no predictions scores (1,1,1); gold with no
// predictions scores (0,0,0).
Prf span_prf_for_pair(const std::vector<std::string>& predicted_spans,
                      const std::vector<std::string>& gold_spans);

// One finding's two span texts, in testimony order.
struct SpanPair {
  std::string span_a;
  std::string span_b;
};

// Greedy bipartite matching between predicted and gold findings. Edge score
// is the mean of the two side F1s; ties break on (gold index, pred index).
// A matched pair is a true positive only when BOTH side F1s reach
// side_threshold. Empty/empty scores (1,1,1).
Prf alignment_prf(const std::vector<SpanPair>& predicted,
                  const std::vector<SpanPair>& gold,
                  double side_threshold = 0.5);

}  // namespace intend::metrics
