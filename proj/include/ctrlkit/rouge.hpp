#pragma once

// Deterministic ROUGE-1/2/L on word tokens. Matching uses the lowercase
// token forms; no stemming or stopword removal, so scores are reproducible
// with no external dependencies. F1 is the reported measure.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctrlkit/text.hpp"

namespace ctrlkit {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace detail {

inline double f1_of(double p, double r) {
  return (p + r == 0.0) ? 0.0 : 2.0 * p * r / (p + r);
}

// n-gram keys are lowercase tokens joined with a separator byte that cannot
// appear inside a token (tokens never contain whitespace).
inline std::unordered_map<std::string, int> ngram_counts(const TokenSequence& tokens,
                                                         std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i].lower;
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key.append(tokens[i + k].lower);
    }
    ++counts[key];
  }
  return counts;
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0 || n == 0) return 0;
  std::vector<std::size_t> prev(n + 1, 0);
  std::vector<std::size_t> curr(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (a[i - 1].lower == b[j - 1].lower) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[n];
}

}  // namespace detail

// Clipped n-gram overlap: precision over candidate n-grams, recall over
// reference n-grams, 0/0 defined as 0.
inline RougeScore rouge_n(const TokenSequence& candidate, const TokenSequence& reference,
                          std::size_t n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = detail::ngram_counts(candidate, n);
  const auto ref = detail::ngram_counts(reference, n);

  long long cand_total = 0;
  for (const auto& [key, c] : cand) cand_total += c;
  long long ref_total = 0;
  for (const auto& [key, c] : ref) ref_total += c;

  long long overlap = 0;
  for (const auto& [key, c] : cand) {
    const auto it = ref.find(key);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }

  RougeScore score;
  score.precision = cand_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(cand_total);
  score.recall = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(ref_total);
  score.f1 = detail::f1_of(score.precision, score.recall);
  return score;
}

// Whole-sequence LCS variant: a single LCS over the full candidate and
// reference, not the summary-level union LCS.
inline RougeScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  const std::size_t lcs = detail::lcs_length(candidate, reference);
  RougeScore score;
  score.precision = candidate.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(candidate.size());
  score.recall = reference.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(reference.size());
  score.f1 = detail::f1_of(score.precision, score.recall);
  return score;
}

// Component-wise arithmetic mean for corpus-level reporting.
inline RougeScore aggregate(const std::vector<RougeScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate: empty score sequence");
  RougeScore mean;
  for (const RougeScore& s : scores) {
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f1 += s.f1;
  }
  const double n = static_cast<double>(scores.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

}  // namespace ctrlkit
