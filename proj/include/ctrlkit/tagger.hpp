#pragma once

// Inference-side keyword pipeline. The sequence tagger itself is an external
// model; this header produces its training file and turns its per-token
// probabilities back into keyword sets, including the length-controlled
// variant driven by bucket statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctrlkit/corpus.hpp"
#include "ctrlkit/oracle.hpp"
#include "ctrlkit/stopwords.hpp"
#include "ctrlkit/text.hpp"

namespace ctrlkit {

// Per-token selection probabilities, aligned to the truncated document.
struct TokenProbs {
  std::string id;
  std::vector<double> probs;
};

struct ExtractionConfig {
  std::size_t n_s = 10;
  double epsilon = 0.25;
  std::size_t m_max = 30;
};

// Built-in profiles; unknown names throw.
inline ExtractionConfig extraction_profile(const std::string& name) {
  if (name == "cnndm") return ExtractionConfig{10, 0.25, 30};
  if (name == "arxiv") return ExtractionConfig{10, 0.15, 40};
  if (name == "bigpatent") return ExtractionConfig{5, 0.15, 30};
  throw std::invalid_argument("unknown profile \"" + name +
                              "\" (expected cnndm, arxiv, or bigpatent)");
}

struct LengthBucketTable {
  std::array<double, 4> boundaries{};  // 20/40/60/80th percentile thresholds
  std::array<std::size_t, 5> K{};      // target keyword count per bucket
};

// Smallest l with length <= boundaries[l]; lengths past the last threshold
// land in the top bucket.
inline int bucket_code(std::size_t length, const LengthBucketTable& table) {
  for (int l = 0; l < 4; ++l) {
    if (static_cast<double>(length) <= table.boundaries[static_cast<std::size_t>(l)]) return l;
  }
  return 4;
}

struct TaggerExample {
  std::string id;
  std::vector<std::string> tokens;  // surface forms of the truncated document
  std::vector<int> labels;          // 1 = keyword position
};

// Positive labels are the token positions the oracle turned into keywords:
// inside a matched span and not a stopword. Duplicate in-span instances all
// stay positive; the out-of-span instances of the same word stay 0.
inline std::vector<int> tagger_labels(const TokenSequence& doc,
                                      const std::vector<TokenSpan>& spans,
                                      const StopwordSet& stopwords) {
  std::vector<int> labels(doc.size(), 0);
  for (const TokenSpan& span : spans) {
    for (std::size_t t = span.begin; t < span.end && t < doc.size(); ++t) {
      if (keyword_eligible(doc[t].lower, stopwords)) labels[t] = 1;
    }
  }
  return labels;
}

inline TaggerExample emit_tagger_example(const Example& example, const OracleResult& oracle,
                                         const OracleConfig& cfg = {}) {
  if (example.id != oracle.id) {
    throw std::invalid_argument("emit_tagger_example: example \"" + example.id +
                                "\" paired with oracle result \"" + oracle.id + "\"");
  }
  const StopwordSet& stopwords = cfg.stopwords ? *cfg.stopwords : default_stopwords();
  const TokenSequence doc =
      truncate(tokenize(example.source, cfg.abbreviations), cfg.max_source_tokens);

  TaggerExample out;
  out.id = example.id;
  out.tokens.reserve(doc.size());
  for (const Token& token : doc) out.tokens.push_back(token.surface);
  out.labels = tagger_labels(doc, oracle.spans, stopwords);
  return out;
}

// Overlap-averaged merge of sliding-window tagger outputs. Windows must be
// given with non-decreasing starts and jointly cover [0, doc_len).
struct ProbWindow {
  std::size_t start = 0;
  std::vector<double> probs;
};

inline std::vector<double> merge_window_probs(const std::vector<ProbWindow>& windows,
                                              std::size_t doc_len) {
  std::vector<double> sum(doc_len, 0.0);
  std::vector<std::size_t> hits(doc_len, 0);
  std::size_t prev_start = 0;
  for (const ProbWindow& w : windows) {
    if (w.start < prev_start) {
      throw std::invalid_argument("merge_window_probs: window starts must be non-decreasing");
    }
    prev_start = w.start;
    for (std::size_t i = 0; i < w.probs.size(); ++i) {
      const std::size_t pos = w.start + i;
      if (pos >= doc_len) {
        throw std::invalid_argument("merge_window_probs: window extends past token " +
                                    std::to_string(doc_len - 1));
      }
      sum[pos] += w.probs[i];
      ++hits[pos];
    }
  }
  for (std::size_t pos = 0; pos < doc_len; ++pos) {
    if (hits[pos] == 0) {
      throw std::invalid_argument("merge_window_probs: no window covers token index " +
                                  std::to_string(pos));
    }
    sum[pos] /= static_cast<double>(hits[pos]);
  }
  return sum;
}

namespace detail {

inline void check_probs_aligned(const TokenSequence& doc, const std::vector<double>& probs) {
  if (probs.size() != doc.size()) {
    throw std::invalid_argument("token probabilities misaligned: " + std::to_string(probs.size()) +
                                " values for " + std::to_string(doc.size()) + " tokens");
  }
  for (const double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("token probability out of [0, 1]");
    }
  }
}

inline std::vector<std::size_t> sentence_of_token(const std::vector<Sentence>& sentences,
                                                  std::size_t doc_size) {
  std::vector<std::size_t> owner(doc_size, 0);
  for (const Sentence& s : sentences) {
    for (std::size_t t = s.token_start; t < s.token_end && t < doc_size; ++t) owner[t] = s.index;
  }
  return owner;
}

// Collapses duplicate lowercase forms to their highest-probability instance
// (ties keep the earliest), then returns surviving positions sorted ascending.
inline std::vector<std::size_t> collapse_duplicates(const std::vector<std::size_t>& positions,
                                                    const TokenSequence& doc,
                                                    const std::vector<double>& probs) {
  std::unordered_map<std::string, std::size_t> winner;
  for (const std::size_t pos : positions) {
    auto [it, inserted] = winner.try_emplace(doc[pos].lower, pos);
    if (!inserted && probs[pos] > probs[it->second]) it->second = pos;
  }
  std::vector<std::size_t> kept;
  kept.reserve(winner.size());
  for (const auto& [form, pos] : winner) kept.push_back(pos);
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Positions -> sentence-grouped keyword set, document order.
inline KeywordSet group_positions(const std::vector<std::size_t>& positions,
                                  const TokenSequence& doc,
                                  const std::vector<std::size_t>& owner) {
  KeywordSet out;
  for (const std::size_t pos : positions) {
    const std::size_t sent = owner[pos];
    if (out.groups.empty() || out.groups.back().sentence_index != sent) {
      out.groups.push_back(KeywordGroup{sent, {}});
    }
    out.groups.back().keywords.push_back(doc[pos].surface);
  }
  return out;
}

}  // namespace detail

// Converts tagger probabilities into inference keywords: top n_s sentences by
// mean probability (ties to lower index), candidates above epsilon excluding
// stopwords, capped at m_max by descending probability (ties to earlier
// position), emitted in document order with lowercase duplicates collapsed.
// Deduplication mirrors the training-side extraction; dedup=false keeps every
// instance for comparison runs.
inline KeywordSet select_inference_keywords(const TokenSequence& doc,
                                            const std::vector<Sentence>& sentences,
                                            const std::vector<double>& probs,
                                            const ExtractionConfig& cfg,
                                            const StopwordSet* stopwords_in = nullptr,
                                            bool dedup = true) {
  if (cfg.n_s == 0 || cfg.m_max == 0) {
    throw std::invalid_argument("select_inference_keywords: n_s and m_max must be positive");
  }
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) {
    throw std::invalid_argument("select_inference_keywords: epsilon must be in [0, 1]");
  }
  detail::check_probs_aligned(doc, probs);
  const StopwordSet& stopwords = stopwords_in ? *stopwords_in : default_stopwords();

  std::vector<std::pair<double, std::size_t>> ranked;  // (-mean handled via comparator)
  ranked.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    double mean = 0.0;
    for (std::size_t t = s.token_start; t < s.token_end; ++t) mean += probs[t];
    if (s.size() > 0) mean /= static_cast<double>(s.size());
    ranked.emplace_back(mean, s.index);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::vector<bool> in_top(sentences.size(), false);
  for (std::size_t r = 0; r < ranked.size() && r < cfg.n_s; ++r) in_top[ranked[r].second] = true;

  std::vector<std::size_t> candidates;
  for (const Sentence& s : sentences) {
    if (!in_top[s.index]) continue;
    for (std::size_t t = s.token_start; t < s.token_end; ++t) {
      if (probs[t] > cfg.epsilon && keyword_eligible(doc[t].lower, stopwords)) {
        candidates.push_back(t);
      }
    }
  }

  if (candidates.size() > cfg.m_max) {
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return a < b;
    });
    candidates.resize(cfg.m_max);
    std::sort(candidates.begin(), candidates.end());
  }

  const std::vector<std::size_t> owner = detail::sentence_of_token(sentences, doc.size());
  const std::vector<std::size_t> kept =
      dedup ? detail::collapse_duplicates(candidates, doc, probs) : candidates;
  return detail::group_positions(kept, doc, owner);
}

// Boundaries from nearest-rank percentiles of reference lengths; K from the
// rounded mean keyword count per bucket, never below 1.
inline LengthBucketTable compute_length_buckets(const std::vector<std::size_t>& reference_lengths,
                                                const std::vector<std::size_t>& keyword_counts) {
  if (reference_lengths.size() != keyword_counts.size()) {
    throw std::invalid_argument("compute_length_buckets: mismatched input sizes");
  }
  const std::size_t n = reference_lengths.size();
  if (n < 5) {
    throw std::invalid_argument("compute_length_buckets: need at least 5 examples, got " +
                                std::to_string(n));
  }
  if (std::all_of(reference_lengths.begin(), reference_lengths.end(),
                  [&](std::size_t l) { return l == reference_lengths.front(); })) {
    throw std::invalid_argument(
        "compute_length_buckets: all reference lengths equal, buckets are degenerate");
  }

  std::vector<std::size_t> sorted = reference_lengths;
  std::sort(sorted.begin(), sorted.end());
  LengthBucketTable table;
  for (std::size_t i = 0; i < 4; ++i) {
    const double percentile = 20.0 * static_cast<double>(i + 1);
    auto rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    table.boundaries[i] = static_cast<double>(sorted[rank - 1]);
  }

  std::array<double, 5> sums{};
  std::array<std::size_t, 5> counts{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(bucket_code(reference_lengths[i], table));
    sums[l] += static_cast<double>(keyword_counts[i]);
    ++counts[l];
  }
  for (std::size_t l = 0; l < 5; ++l) {
    if (counts[l] == 0) {
      table.K[l] = 1;
      continue;
    }
    const auto k = static_cast<long>(std::lround(sums[l] / static_cast<double>(counts[l])));
    table.K[l] = k < 1 ? 1 : static_cast<std::size_t>(k);
  }
  return table;
}

// Length-controlled selection: every non-stopword token is a candidate
// (collapsed by lowercase form to the max-probability instance), ranked by
// probability with earlier positions winning ties, and the top K_l emitted in
// document order. sentence_prefilter_n restricts candidates to the top-n
// sentences by mean probability; 0 disables the filter.
inline KeywordSet length_keywords(const TokenSequence& doc,
                                  const std::vector<Sentence>& sentences,
                                  const std::vector<double>& probs, int l,
                                  const LengthBucketTable& table,
                                  const StopwordSet* stopwords_in = nullptr,
                                  std::size_t sentence_prefilter_n = 0) {
  if (l < 0 || l > 4) {
    throw std::invalid_argument("length_keywords: bucket code " + std::to_string(l) +
                                " out of range 0..4");
  }
  detail::check_probs_aligned(doc, probs);
  const StopwordSet& stopwords = stopwords_in ? *stopwords_in : default_stopwords();

  std::vector<bool> allowed(sentences.size(), true);
  if (sentence_prefilter_n > 0) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (const Sentence& s : sentences) {
      double mean = 0.0;
      for (std::size_t t = s.token_start; t < s.token_end; ++t) mean += probs[t];
      if (s.size() > 0) mean /= static_cast<double>(s.size());
      ranked.emplace_back(mean, s.index);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    allowed.assign(sentences.size(), false);
    for (std::size_t r = 0; r < ranked.size() && r < sentence_prefilter_n; ++r) {
      allowed[ranked[r].second] = true;
    }
  }

  std::vector<std::size_t> candidates;
  for (const Sentence& s : sentences) {
    if (!allowed[s.index]) continue;
    for (std::size_t t = s.token_start; t < s.token_end; ++t) {
      if (keyword_eligible(doc[t].lower, stopwords)) candidates.push_back(t);
    }
  }

  std::vector<std::size_t> distinct = detail::collapse_duplicates(candidates, doc, probs);
  std::sort(distinct.begin(), distinct.end(), [&](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  const std::size_t K = table.K[static_cast<std::size_t>(l)];
  if (distinct.size() > K) distinct.resize(K);
  std::sort(distinct.begin(), distinct.end());

  const std::vector<std::size_t> owner = detail::sentence_of_token(sentences, doc.size());
  return detail::group_positions(distinct, doc, owner);
}

}  // namespace ctrlkit
