#pragma once

// Training-time keyword extraction: greedily pick the source sentences that
// maximize ROUGE against the reference, take the longest token runs those
// sentences share with the reference, then strip stopwords and duplicates.
// The result is the keyword half of the control tokens a summarizer is
// trained on, plus the spans needed to label tagger training data.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ctrlkit/corpus.hpp"
#include "ctrlkit/rng.hpp"
#include "ctrlkit/rouge.hpp"
#include "ctrlkit/stopwords.hpp"
#include "ctrlkit/text.hpp"

namespace ctrlkit {

// Keywords grouped by the source sentence they came from, in document order.
struct KeywordGroup {
  std::size_t sentence_index = 0;
  std::vector<std::string> keywords;  // surface forms, in source token order
};

struct KeywordSet {
  std::vector<KeywordGroup> groups;

  bool empty() const { return groups.empty(); }

  std::size_t total_keywords() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.keywords.size();
    return n;
  }

  std::vector<std::string> flattened() const {
    std::vector<std::string> out;
    out.reserve(total_keywords());
    for (const auto& g : groups) {
      out.insert(out.end(), g.keywords.begin(), g.keywords.end());
    }
    return out;
  }

  bool operator==(const KeywordSet& other) const {
    if (groups.size() != other.groups.size()) return false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].sentence_index != other.groups[i].sentence_index) return false;
      if (groups[i].keywords != other.groups[i].keywords) return false;
    }
    return true;
  }
};

// Half-open run of document token indices.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

namespace detail {

// Greedy objective: mean of ROUGE-1 F1 and ROUGE-2 F1.
inline double selection_score(const TokenSequence& candidate, const TokenSequence& reference) {
  const double r1 = rouge_n(candidate, reference, 1).f1;
  const double r2 = rouge_n(candidate, reference, 2).f1;
  return (r1 + r2) / 2.0;
}

inline TokenSequence concat_sentences(const std::vector<Sentence>& sentences,
                                      const std::vector<std::size_t>& indices,
                                      const TokenSequence& doc) {
  TokenSequence out;
  for (const std::size_t idx : indices) {
    const Sentence& s = sentences[idx];
    out.insert(out.end(), doc.begin() + s.token_start, doc.begin() + s.token_end);
  }
  return out;
}

}  // namespace detail

// Iteratively adds the sentence whose inclusion maximizes the greedy
// objective of the concatenation in document order; ties prefer the lower
// sentence index; stops when no sentence strictly improves the score.
// max_sentences == 0 means no cap. Returns ascending indices.
inline std::vector<std::size_t> greedy_select_sentences(
    const std::vector<Sentence>& sentences, const TokenSequence& doc,
    const TokenSequence& reference, std::size_t max_sentences = 0) {
  if (reference.empty()) {
    throw std::invalid_argument("greedy_select_sentences: empty reference");
  }

  std::vector<std::size_t> selected;
  std::vector<bool> used(sentences.size(), false);
  double best_score = 0.0;

  while (selected.size() < sentences.size()) {
    if (max_sentences != 0 && selected.size() >= max_sentences) break;

    std::optional<std::size_t> best_idx;
    double round_best = best_score;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (used[i]) continue;
      std::vector<std::size_t> trial = selected;
      trial.push_back(i);
      std::sort(trial.begin(), trial.end());
      const double score =
          detail::selection_score(detail::concat_sentences(sentences, trial, doc), reference);
      if (score > round_best) {
        round_best = score;
        best_idx = i;
      }
    }
    if (!best_idx) break;
    used[*best_idx] = true;
    selected.push_back(*best_idx);
    best_score = round_best;
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

// Scans each selected sentence left to right; at every position takes the
// longest contiguous token run (on lowercase forms) that also occurs
// contiguously in the reference, emits it, and resumes after it. Positions
// with no match advance by one.
inline std::vector<TokenSpan> match_subsequences(const std::vector<Sentence>& selected,
                                                 const TokenSequence& doc,
                                                 const TokenSequence& reference) {
  // Reference positions per lowercase form, for run extension.
  std::unordered_map<std::string, std::vector<std::size_t>> ref_positions;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    ref_positions[reference[j].lower].push_back(j);
  }

  std::vector<TokenSpan> spans;
  for (const Sentence& sentence : selected) {
    std::size_t i = sentence.token_start;
    while (i < sentence.token_end) {
      const auto it = ref_positions.find(doc[i].lower);
      if (it == ref_positions.end()) {
        ++i;
        continue;
      }
      std::size_t best_len = 0;
      for (const std::size_t start : it->second) {
        std::size_t len = 0;
        while (i + len < sentence.token_end && start + len < reference.size() &&
               doc[i + len].lower == reference[start + len].lower) {
          ++len;
        }
        best_len = std::max(best_len, len);
      }
      spans.push_back(TokenSpan{i, i + best_len});
      i += best_len;
    }
  }
  return spans;
}

struct OracleConfig {
  const StopwordSet* stopwords = nullptr;   // nullptr -> default_stopwords()
  const AbbrevSet* abbreviations = nullptr; // nullptr -> default_abbreviations()
  std::size_t max_source_tokens = 1024;
  std::size_t max_reference_tokens = 256;
  std::size_t max_sentences = 0;            // greedy cap; 0 = none
};

// Everything the downstream stages need from one extraction run.
struct OracleResult {
  std::string id;
  std::vector<std::size_t> selected_sentences;
  std::vector<TokenSpan> spans;  // document token indices
  KeywordSet keywords;
};

inline OracleResult extract_oracle(const Example& example, const OracleConfig& cfg = {}) {
  if (!example.reference) {
    throw std::invalid_argument("extract_oracle: example \"" + example.id +
                                "\" has no reference summary");
  }
  const StopwordSet& stopwords = cfg.stopwords ? *cfg.stopwords : default_stopwords();

  const TokenSequence doc =
      truncate(tokenize(example.source, cfg.abbreviations), cfg.max_source_tokens);
  const TokenSequence reference =
      truncate(tokenize(*example.reference, cfg.abbreviations), cfg.max_reference_tokens);
  if (reference.empty()) {
    throw std::invalid_argument("extract_oracle: example \"" + example.id +
                                "\" has an empty reference after tokenization");
  }
  const std::vector<Sentence> sentences = split_sentences(doc, cfg.abbreviations);

  OracleResult result;
  result.id = example.id;
  result.selected_sentences =
      greedy_select_sentences(sentences, doc, reference, cfg.max_sentences);

  std::vector<Sentence> selected;
  selected.reserve(result.selected_sentences.size());
  for (const std::size_t idx : result.selected_sentences) selected.push_back(sentences[idx]);
  result.spans = match_subsequences(selected, doc, reference);

  // Sentence index per token, for grouping.
  std::vector<std::size_t> sentence_of(doc.size(), 0);
  for (const Sentence& s : sentences) {
    for (std::size_t t = s.token_start; t < s.token_end; ++t) sentence_of[t] = s.index;
  }

  std::unordered_set<std::string> seen;
  KeywordSet& keywords = result.keywords;
  for (const TokenSpan& span : result.spans) {
    for (std::size_t t = span.begin; t < span.end; ++t) {
      const Token& token = doc[t];
      if (!keyword_eligible(token.lower, stopwords)) continue;
      if (!seen.insert(token.lower).second) continue;  // keep first occurrence
      const std::size_t sent = sentence_of[t];
      if (keywords.groups.empty() || keywords.groups.back().sentence_index != sent) {
        keywords.groups.push_back(KeywordGroup{sent, {}});
      }
      keywords.groups.back().keywords.push_back(token.surface);
    }
  }
  return result;
}

inline KeywordSet extract_oracle_keywords(const Example& example, const OracleConfig& cfg = {}) {
  return extract_oracle(example, cfg).keywords;
}

// Drops each keyword independently with probability `rate`, using the pinned
// generator stream (see rng.hpp); emptied groups are removed. Applies to
// training emission only, never inference.
inline KeywordSet dropout_keywords(const KeywordSet& keywords, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) {
    throw std::invalid_argument("dropout_keywords: rate must be in [0, 1]");
  }
  SplitMix64 rng{seed};
  KeywordSet out;
  for (const KeywordGroup& group : keywords.groups) {
    KeywordGroup kept{group.sentence_index, {}};
    for (const std::string& keyword : group.keywords) {
      if (rng.next_unit() >= rate) kept.keywords.push_back(keyword);
    }
    if (!kept.keywords.empty()) out.groups.push_back(std::move(kept));
  }
  return out;
}

}  // namespace ctrlkit
