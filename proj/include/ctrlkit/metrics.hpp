#pragma once

// Control-aspect metrics: entity success rate, length MAD / Pearson
// correlation, extractive-QA token F1, and the corpus-level evaluation
// report that stitches them together with ROUGE.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctrlkit/corpus.hpp"
#include "ctrlkit/rouge.hpp"
#include "ctrlkit/tagger.hpp"
#include "ctrlkit/text.hpp"
#include "ctrlkit/util.hpp"

namespace ctrlkit {

// Fraction of (summary, entity) pairs where the entity's token sequence
// occurs contiguously in the summary, case-insensitive. Token-level matching
// avoids counting "ISIS" inside "crisis".
inline double success_rate(const std::vector<std::string>& summaries,
                           const std::vector<std::string>& entities) {
  if (summaries.size() != entities.size()) {
    throw std::invalid_argument("success_rate: " + std::to_string(summaries.size()) +
                                " summaries vs " + std::to_string(entities.size()) + " entities");
  }
  if (summaries.empty()) {
    throw std::invalid_argument("success_rate: empty input");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const TokenSequence summary = tokenize(summaries[i]);
    const TokenSequence entity = tokenize(entities[i]);
    if (entity.empty() || entity.size() > summary.size()) continue;
    for (std::size_t s = 0; s + entity.size() <= summary.size(); ++s) {
      bool match = true;
      for (std::size_t k = 0; k < entity.size(); ++k) {
        if (summary[s + k].lower != entity[k].lower) {
          match = false;
          break;
        }
      }
      if (match) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(summaries.size());
}

// Mean absolute deviation between system and reference bucket codes.
inline double mad(const std::vector<int>& l_sys, const std::vector<int>& l_ref) {
  if (l_sys.size() != l_ref.size() || l_sys.empty()) {
    throw std::invalid_argument("mad: sequences must be equal-length and non-empty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < l_sys.size(); ++i) {
    if (l_sys[i] < 0 || l_sys[i] > 4 || l_ref[i] < 0 || l_ref[i] > 4) {
      throw std::invalid_argument("mad: bucket codes must be in 0..4");
    }
    sum += std::abs(l_sys[i] - l_ref[i]);
  }
  return sum / static_cast<double>(l_sys.size());
}

// Pearson correlation; nullopt (undefined) when either variance is zero,
// which is distinct from a true zero correlation.
inline std::optional<double> pcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pcc: sequences must be equal length");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("pcc: need at least 2 observations");
  }
  const auto n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Answer normalization: lowercase, drop punctuation characters, remove the
// articles a/an/the, collapse whitespace. Returns the token bag.
inline std::vector<std::string> qa_normalize(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (const char c : text) {
    if (is_ascii_punct(c)) continue;
    cleaned.push_back(ascii_lower_char(c));
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && (cleaned[i] == ' ' || cleaned[i] == '\t' || cleaned[i] == '\n' ||
                                  cleaned[i] == '\r' || cleaned[i] == '\f' || cleaned[i] == '\v')) {
      ++i;
    }
    std::size_t start = i;
    while (i < cleaned.size() && !(cleaned[i] == ' ' || cleaned[i] == '\t' || cleaned[i] == '\n' ||
                                   cleaned[i] == '\r' || cleaned[i] == '\f' || cleaned[i] == '\v')) {
      ++i;
    }
    if (i > start) {
      std::string token = cleaned.substr(start, i - start);
      if (token != "a" && token != "an" && token != "the") tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

namespace detail {

inline double token_bag_f1(const std::vector<std::string>& pred,
                           const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) {
    return pred == gold ? 1.0 : 0.0;  // both empty counts as exact agreement
  }
  std::unordered_map<std::string, std::size_t> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace detail

// Token-bag F1 of the normalized prediction against each gold answer;
// the best gold wins.
inline double qa_f1(const std::string& prediction, const std::vector<std::string>& gold_answers) {
  if (gold_answers.empty()) {
    throw std::invalid_argument("qa_f1: gold answer set is empty");
  }
  const std::vector<std::string> pred = qa_normalize(prediction);
  double best = 0.0;
  for (const std::string& gold : gold_answers) {
    best = std::max(best, detail::token_bag_f1(pred, qa_normalize(gold)));
  }
  return best;
}

struct Prediction {
  std::string id;
  std::string summary;
  std::optional<int> requested_bucket;  // length-control request, if any
};

// Metric name -> value; nullopt marks a metric that is genuinely undefined
// on this run (e.g. zero-variance correlation), as opposed to 0.
struct EvalReport {
  std::map<std::string, std::optional<double>> values;
  std::size_t n = 0;
};

// Computes the requested metric aspects over predictions joined to corpus
// examples by id. Aspects: rouge (rouge1/rouge2/rougeL mean F1),
// success_rate (each summary against each of its example's entities), length
// (mad of realized-vs-reference bucket codes and pcc of requested-vs-realized
// codes; the reference code stands in for the request when none is given),
// qa (mean token F1 over question-bearing examples).
inline EvalReport evaluate_run(const std::vector<Prediction>& predictions,
                               const std::vector<Example>& examples,
                               const std::set<std::string>& aspects,
                               const LengthBucketTable* table = nullptr,
                               const AbbrevSet* abbrevs = nullptr) {
  static const std::set<std::string> known = {"rouge", "success_rate", "length", "qa"};
  for (const std::string& aspect : aspects) {
    if (!known.count(aspect)) {
      throw std::invalid_argument("evaluate_run: unknown aspect \"" + aspect + "\"");
    }
  }
  if (aspects.empty()) {
    throw std::invalid_argument("evaluate_run: no aspects requested");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("evaluate_run: no predictions");
  }

  std::unordered_map<std::string, const Example*> by_id;
  for (const Example& example : examples) by_id.emplace(example.id, &example);

  std::vector<std::string> missing;
  std::unordered_map<std::string, std::size_t> seen;
  for (const Prediction& pred : predictions) {
    if (seen.count(pred.id)) {
      throw std::invalid_argument("evaluate_run: duplicate prediction id \"" + pred.id + "\"");
    }
    seen.emplace(pred.id, 0);
    if (!by_id.count(pred.id)) missing.push_back(pred.id);
  }
  if (!missing.empty()) {
    throw std::invalid_argument("evaluate_run: predictions for unknown ids: " +
                                join(missing, ", "));
  }

  EvalReport report;
  report.n = predictions.size();

  const bool want_rouge = aspects.count("rouge") > 0;
  const bool want_length = aspects.count("length") > 0;
  if (want_length && table == nullptr) {
    throw std::invalid_argument("evaluate_run: length aspect requires a bucket table");
  }

  double r1 = 0.0, r2 = 0.0, rl = 0.0;
  std::vector<int> l_sys, l_ref, l_req;
  for (const Prediction& pred : predictions) {
    const Example& example = *by_id.at(pred.id);
    if ((want_rouge || want_length) && !example.reference) {
      throw std::invalid_argument("evaluate_run: example \"" + example.id +
                                  "\" has no reference summary");
    }
    if (want_rouge || want_length) {
      const TokenSequence sys = tokenize(pred.summary, abbrevs);
      const TokenSequence ref = tokenize(*example.reference, abbrevs);
      if (want_rouge) {
        r1 += rouge_n(sys, ref, 1).f1;
        r2 += rouge_n(sys, ref, 2).f1;
        rl += rouge_l(sys, ref).f1;
      }
      if (want_length) {
        const int code_sys = bucket_code(sys.size(), *table);
        const int code_ref = bucket_code(ref.size(), *table);
        l_sys.push_back(code_sys);
        l_ref.push_back(code_ref);
        l_req.push_back(pred.requested_bucket.value_or(code_ref));
      }
    }
  }

  if (want_rouge) {
    const auto n = static_cast<double>(predictions.size());
    report.values["rouge1"] = r1 / n;
    report.values["rouge2"] = r2 / n;
    report.values["rougeL"] = rl / n;
  }

  if (want_length) {
    report.values["mad"] = mad(l_sys, l_ref);
    std::vector<double> req(l_req.begin(), l_req.end());
    std::vector<double> sys(l_sys.begin(), l_sys.end());
    report.values["pcc"] = pcc(req, sys);
  }

  if (aspects.count("success_rate")) {
    std::vector<std::string> summaries, entities;
    for (const Prediction& pred : predictions) {
      const Example& example = *by_id.at(pred.id);
      for (const std::string& entity : example.entities) {
        summaries.push_back(pred.summary);
        entities.push_back(entity);
      }
    }
    if (summaries.empty()) {
      throw std::invalid_argument("evaluate_run: success_rate requested but no example lists entities");
    }
    report.values["success_rate"] = success_rate(summaries, entities);
  }

  if (aspects.count("qa")) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Prediction& pred : predictions) {
      const Example& example = *by_id.at(pred.id);
      if (!example.question) continue;
      sum += qa_f1(pred.summary, example.gold_answers);
      ++count;
    }
    if (count == 0) {
      throw std::invalid_argument("evaluate_run: qa requested but no example carries a question");
    }
    report.values["qa_f1"] = sum / static_cast<double>(count);
  }

  return report;
}

}  // namespace ctrlkit
