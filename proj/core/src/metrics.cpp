#include "intend/metrics.hpp"

#include <algorithm>
#include <tuple>

#include "intend/text.hpp"

namespace intend::metrics {

std::vector<Token> tokenize_spans(std::string_view s) {
  const auto cps = text::decode_utf8(s);
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && text::is_space(text::fold_compat(cps[i].value))) ++i;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !text::is_space(text::fold_compat(cps[j].value))) ++j;
    // Strip surrounding punctuation; keep interior punctuation.
    std::size_t a = i;
    std::size_t b = j;
    while (a < b && text::is_punct(text::fold_compat(cps[a].value))) ++a;
    while (b > a && text::is_punct(text::fold_compat(cps[b - 1].value))) --b;
    if (a < b) {
      std::string norm;
      for (std::size_t k = a; k < b; ++k) {
        norm += text::encode_utf8(text::fold_compat(text::fold_case(cps[k].value)));
      }
      out.push_back({std::move(norm), a, b});
    }
    i = j;
  }
  return out;
}

void TokenBag::add(std::string token) {
  ++counts_[std::move(token)];
  ++total_;
}

int TokenBag::count(const std::string& token) const {
  const auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

int TokenBag::intersection_size(const TokenBag& other) const {
  // Walk the smaller map.
  const TokenBag* small = this;
  const TokenBag* large = &other;
  if (small->counts_.size() > large->counts_.size()) std::swap(small, large);
  int shared = 0;
  for (const auto& [tok, cnt] : small->counts_) {
    shared += std::min(cnt, large->count(tok));
  }
  return shared;
}

TokenBag tokenize(std::string_view s) {
  TokenBag bag;
  for (auto& t : tokenize_spans(s)) {
    bag.add(std::move(t.norm));
  }
  return bag;
}

double f1_of(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Prf token_prf(const TokenBag& predicted, const TokenBag& gold) {
  if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  if (predicted.empty() || gold.empty()) return {0.0, 0.0, 0.0};
  const int shared = predicted.intersection_size(gold);
  const double p = static_cast<double>(shared) / predicted.size();
  const double r = static_cast<double>(shared) / gold.size();
  return {p, r, f1_of(p, r)};
}

double token_f1(std::string_view a, std::string_view b) {
  return token_prf(tokenize(a), tokenize(b)).f1;
}

double coverage(std::string_view predicted_span, std::string_view testimony) {
  const TokenBag pred = tokenize(predicted_span);
  if (pred.empty()) return 0.0;
  const TokenBag host = tokenize(testimony);
  return static_cast<double>(pred.intersection_size(host)) / pred.size();
}

Prf span_prf_for_pair(const std::vector<std::string>& predicted_spans,
                      const std::vector<std::string>& gold_spans) {
  TokenBag pred;
  for (const auto& s : predicted_spans) {
    for (auto& t : tokenize_spans(s)) pred.add(std::move(t.norm));
  }
  TokenBag gold;
  for (const auto& s : gold_spans) {
    for (auto& t : tokenize_spans(s)) gold.add(std::move(t.norm));
  }
  return token_prf(pred, gold);
}

Prf alignment_prf(const std::vector<SpanPair>& predicted,
                  const std::vector<SpanPair>& gold,
                  double side_threshold) {
  if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  if (predicted.empty() || gold.empty()) return {0.0, 0.0, 0.0};

  struct Edge {
    double score;
    std::size_t gold_idx;
    std::size_t pred_idx;
    double f1_a;
    double f1_b;
  };
  std::vector<Edge> edges;
  edges.reserve(predicted.size() * gold.size());

  std::vector<TokenBag> pred_a(predicted.size()), pred_b(predicted.size());
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    pred_a[p] = tokenize(predicted[p].span_a);
    pred_b[p] = tokenize(predicted[p].span_b);
  }
  for (std::size_t g = 0; g < gold.size(); ++g) {
    const TokenBag gold_a = tokenize(gold[g].span_a);
    const TokenBag gold_b = tokenize(gold[g].span_b);
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      const double fa = token_prf(pred_a[p], gold_a).f1;
      const double fb = token_prf(pred_b[p], gold_b).f1;
      edges.push_back({(fa + fb) / 2.0, g, p, fa, fb});
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(y.score, x.gold_idx, x.pred_idx) <
           std::tie(x.score, y.gold_idx, y.pred_idx);
  });

  std::vector<bool> gold_used(gold.size(), false);
  std::vector<bool> pred_used(predicted.size(), false);
  int tp = 0;
  for (const auto& e : edges) {
    if (gold_used[e.gold_idx] || pred_used[e.pred_idx]) continue;
    gold_used[e.gold_idx] = true;
    pred_used[e.pred_idx] = true;
    if (e.f1_a >= side_threshold && e.f1_b >= side_threshold) ++tp;
  }
  const double p = static_cast<double>(tp) / predicted.size();
  const double r = static_cast<double>(tp) / gold.size();
  return {p, r, f1_of(p, r)};
}

}  // namespace intend::metrics
