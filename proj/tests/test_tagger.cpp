#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "ctrlkit/oracle.hpp"
#include "ctrlkit/tagger.hpp"
#include "ctrlkit/text.hpp"
#include "test_helpers.hpp"

using namespace ctrlkit;
using namespace testutil;

TEST_CASE("extraction profiles carry the pinned hyperparameters") {
  const ExtractionConfig cnndm = extraction_profile("cnndm");
  CHECK(cnndm.n_s == 10);
  CHECK(cnndm.epsilon == 0.25);
  CHECK(cnndm.m_max == 30);
  const ExtractionConfig arxiv = extraction_profile("arxiv");
  CHECK(arxiv.n_s == 10);
  CHECK(arxiv.epsilon == 0.15);
  CHECK(arxiv.m_max == 40);
  const ExtractionConfig bigpatent = extraction_profile("bigpatent");
  CHECK(bigpatent.n_s == 5);
  CHECK(bigpatent.epsilon == 0.15);
  CHECK(bigpatent.m_max == 30);
  CHECK_THROWS_AS(extraction_profile("newsroom"), std::invalid_argument);
}

TEST_CASE("tagger labels mark eligible in-span tokens") {
  Example ex;
  ex.id = "t1";
  ex.source = "Troops reached the camp. Nothing else happened.";
  ex.reference = "Troops reached the camp.";
  const OracleResult oracle = extract_oracle(ex);
  const TaggerExample tagged = emit_tagger_example(ex, oracle);
  REQUIRE(tagged.tokens.size() == 9);
  // Sentence 0 is fully matched: Troops reached the camp .
  // "the" and "." are not keyword-eligible; sentence 1 is unselected.
  CHECK(tagged.labels == std::vector<int>{1, 1, 0, 1, 0, 0, 0, 0, 0});
}

TEST_CASE("empty keyword set labels nothing") {
  Example ex;
  ex.id = "t2";
  ex.source = "Alpha beta gamma.";
  ex.reference = "totally different words";
  const OracleResult oracle = extract_oracle(ex);
  const TaggerExample tagged = emit_tagger_example(ex, oracle);
  CHECK(tagged.labels == std::vector<int>(tagged.tokens.size(), 0));
}

TEST_CASE("only the in-span instance of a repeated word is positive") {
  Example ex;
  ex.id = "t3";
  ex.source = "The refinery burned. Workers fled the refinery.";
  ex.reference = "Workers fled the refinery.";
  const OracleResult oracle = extract_oracle(ex);
  CHECK(oracle.selected_sentences == std::vector<std::size_t>{1});
  const TaggerExample tagged = emit_tagger_example(ex, oracle);
  // tokens: The refinery burned . Workers fled the refinery .
  CHECK(tagged.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 0, 1, 0});
}

TEST_CASE("emit_tagger_example rejects mismatched ids") {
  Example ex;
  ex.id = "a";
  ex.source = "Alpha beta.";
  ex.reference = "Alpha beta.";
  OracleResult oracle = extract_oracle(ex);
  oracle.id = "b";
  CHECK_THROWS_AS(emit_tagger_example(ex, oracle), std::invalid_argument);
}

TEST_CASE("a single window covering the document merges to itself") {
  const std::vector<double> probs = {0.1, 0.2, 0.3};
  CHECK(merge_window_probs({ProbWindow{0, probs}}, 3) == probs);
}

TEST_CASE("overlapping windows average their predictions") {
  ProbWindow first{0, std::vector<double>(10, 0.2)};
  ProbWindow second{5, std::vector<double>(10, 0.6)};
  const std::vector<double> merged = merge_window_probs({first, second}, 15);
  for (std::size_t i = 0; i < 5; ++i) CHECK(merged[i] == 0.2);
  for (std::size_t i = 5; i < 10; ++i) CHECK(merged[i] == Catch::Approx(0.4));
  for (std::size_t i = 10; i < 15; ++i) CHECK(merged[i] == 0.6);
}

TEST_CASE("coverage gaps are reported with the first uncovered index") {
  ProbWindow first{0, {0.5, 0.5, 0.5}};
  ProbWindow second{4, {0.5}};
  CHECK_THROWS_WITH(merge_window_probs({first, second}, 5),
                    Catch::Matchers::ContainsSubstring("token index 3"));
}

TEST_CASE("window starts must be non-decreasing and in range") {
  ProbWindow early{2, {0.5}};
  ProbWindow late{0, {0.5}};
  CHECK_THROWS_AS(merge_window_probs({early, late}, 3), std::invalid_argument);
  ProbWindow overrun{0, {0.5, 0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(merge_window_probs({overrun}, 3), std::invalid_argument);
}

namespace {

struct SelectFixture {
  TokenSequence doc;
  std::vector<Sentence> sentences;

  explicit SelectFixture(const std::vector<std::vector<std::string>>& sents) {
    std::vector<std::string> flat;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < sents.size(); ++s) {
      for (const std::string& w : sents[s]) flat.push_back(w);
      sentences.push_back(Sentence{s, pos, pos + sents[s].size()});
      pos += sents[s].size();
    }
    doc = make_tokens(flat);
  }
};

std::vector<std::string> flat_keywords(const KeywordSet& set) { return set.flattened(); }

}  // namespace

TEST_CASE("selection keeps high-probability tokens from the top sentence") {
  SelectFixture fx({{"alpha", "beta"}, {"gamma", "delta"}});
  const std::vector<double> probs = {0.9, 0.8, 0.1, 0.1};
  ExtractionConfig cfg;
  cfg.n_s = 1;
  cfg.epsilon = 0.5;
  cfg.m_max = 2;
  const KeywordSet got = select_inference_keywords(fx.doc, fx.sentences, probs, cfg);
  REQUIRE(got.groups.size() == 1);
  CHECK(got.groups[0].sentence_index == 0);
  CHECK(got.groups[0].keywords == std::vector<std::string>{"alpha", "beta"});
}

TEST_CASE("epsilon one admits nothing because the comparison is strict") {
  SelectFixture fx(std::vector<std::vector<std::string>>{{"alpha", "beta"}});
  ExtractionConfig cfg;
  cfg.epsilon = 1.0;
  CHECK(select_inference_keywords(fx.doc, fx.sentences, {1.0, 1.0}, cfg).empty());
}

TEST_CASE("a probability exactly at epsilon is excluded") {
  SelectFixture fx(std::vector<std::vector<std::string>>{{"alpha", "beta"}});
  ExtractionConfig cfg;
  cfg.epsilon = 0.25;
  const KeywordSet got = select_inference_keywords(fx.doc, fx.sentences, {0.25, 0.26}, cfg);
  CHECK(flat_keywords(got) == std::vector<std::string>{"beta"});
}

TEST_CASE("m_max keeps the highest-probability candidates in document order") {
  SelectFixture fx({{"aa", "bb", "cc", "dd"}});
  ExtractionConfig cfg;
  cfg.epsilon = 0.1;
  cfg.m_max = 2;
  const KeywordSet got =
      select_inference_keywords(fx.doc, fx.sentences, {0.3, 0.9, 0.2, 0.8}, cfg);
  CHECK(flat_keywords(got) == std::vector<std::string>{"bb", "dd"});
}

TEST_CASE("stopwords never become keywords even with high probability") {
  SelectFixture fx({{"the", "camp", ".", "fell"}});
  ExtractionConfig cfg;
  cfg.epsilon = 0.1;
  const KeywordSet got =
      select_inference_keywords(fx.doc, fx.sentences, {0.99, 0.8, 0.99, 0.7}, cfg);
  CHECK(flat_keywords(got) == std::vector<std::string>{"camp", "fell"});
}

TEST_CASE("dedup keeps the strongest instance and can be disabled") {
  SelectFixture fx({{"camp", "fell"}, {"camp", "rose"}});
  ExtractionConfig cfg;
  cfg.epsilon = 0.1;
  cfg.n_s = 2;
  const std::vector<double> probs = {0.5, 0.6, 0.9, 0.6};
  const KeywordSet deduped = select_inference_keywords(fx.doc, fx.sentences, probs, cfg, nullptr, true);
  // The sentence-1 instance of "camp" has the higher probability.
  REQUIRE(deduped.groups.size() == 2);
  CHECK(deduped.groups[0].keywords == std::vector<std::string>{"fell"});
  CHECK(deduped.groups[1].keywords == std::vector<std::string>{"camp", "rose"});

  const KeywordSet kept = select_inference_keywords(fx.doc, fx.sentences, probs, cfg, nullptr, false);
  CHECK(kept.total_keywords() == 4);
}

TEST_CASE("selection validates its configuration and alignment") {
  SelectFixture fx({{"alpha"}});
  ExtractionConfig cfg;
  cfg.n_s = 0;
  CHECK_THROWS_AS(select_inference_keywords(fx.doc, fx.sentences, {0.5}, cfg),
                  std::invalid_argument);
  cfg = ExtractionConfig{};
  cfg.m_max = 0;
  CHECK_THROWS_AS(select_inference_keywords(fx.doc, fx.sentences, {0.5}, cfg),
                  std::invalid_argument);
  cfg = ExtractionConfig{};
  cfg.epsilon = 1.5;
  CHECK_THROWS_AS(select_inference_keywords(fx.doc, fx.sentences, {0.5}, cfg),
                  std::invalid_argument);
  cfg = ExtractionConfig{};
  CHECK_THROWS_AS(select_inference_keywords(fx.doc, fx.sentences, {0.5, 0.5}, cfg),
                  std::invalid_argument);
}

TEST_CASE("length buckets follow nearest-rank percentiles") {
  std::vector<std::size_t> lengths = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::size_t> counts = lengths;  // keyword counts mirror lengths
  const LengthBucketTable table = compute_length_buckets(lengths, counts);
  CHECK(table.boundaries == std::array<double, 4>{2.0, 4.0, 6.0, 8.0});
  CHECK(table.K == std::array<std::size_t, 5>{2, 4, 6, 8, 10});
}

TEST_CASE("length bucket table validation") {
  CHECK_THROWS_AS(compute_length_buckets({1, 2, 3, 4}, {1, 1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(compute_length_buckets({3, 3, 3, 3, 3}, {1, 1, 1, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_length_buckets({1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("tiny keyword means clamp K to one") {
  const LengthBucketTable table =
      compute_length_buckets({1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                             {0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  for (const std::size_t k : table.K) CHECK(k == 1);
}

TEST_CASE("empty buckets default their K to one") {
  // Eight references of length 1 push every boundary to 1; lengths 2 and 3
  // land in the top bucket, leaving buckets 1..3 empty.
  const LengthBucketTable table =
      compute_length_buckets({1, 1, 1, 1, 1, 1, 1, 1, 2, 3},
                             {4, 4, 4, 4, 4, 4, 4, 4, 9, 9});
  CHECK(table.K[0] == 4);
  CHECK(table.K[1] == 1);
  CHECK(table.K[2] == 1);
  CHECK(table.K[3] == 1);
  CHECK(table.K[4] == 9);
}

TEST_CASE("bucket codes tie to the lower bucket at boundaries") {
  LengthBucketTable table;
  table.boundaries = {2.0, 4.0, 6.0, 8.0};
  table.K = {1, 1, 1, 1, 1};
  CHECK(bucket_code(1, table) == 0);
  CHECK(bucket_code(2, table) == 0);
  CHECK(bucket_code(4, table) == 1);
  CHECK(bucket_code(5, table) == 2);
  CHECK(bucket_code(9, table) == 4);
  CHECK(bucket_code(100, table) == 4);
}

TEST_CASE("length_keywords saturates when K exceeds the candidate pool") {
  SelectFixture fx({{"one", "two", "the"}, {"three", "."}});
  LengthBucketTable table;
  table.boundaries = {1, 2, 3, 4};
  table.K = {1, 2, 3, 9, 9};
  const std::vector<double> probs = {0.5, 0.5, 0.5, 0.5, 0.5};
  const KeywordSet got = length_keywords(fx.doc, fx.sentences, probs, 4, table);
  CHECK(flat_keywords(got) == std::vector<std::string>{"one", "two", "three"});
}

TEST_CASE("uniform probabilities break ties toward earlier positions") {
  SelectFixture fx({{"one", "two", "three", "four"}});
  LengthBucketTable table;
  table.boundaries = {1, 2, 3, 4};
  table.K = {2, 2, 2, 2, 2};
  const std::vector<double> probs(4, 0.5);
  const KeywordSet got = length_keywords(fx.doc, fx.sentences, probs, 0, table);
  CHECK(flat_keywords(got) == std::vector<std::string>{"one", "two"});
}

TEST_CASE("output sizes track K exactly while candidates last") {
  std::vector<std::vector<std::string>> sents;
  std::vector<std::string> words;
  for (int i = 0; i < 25; ++i) words.push_back("w" + std::to_string(i));
  sents.push_back(words);
  SelectFixture fx(sents);
  LengthBucketTable table;
  table.boundaries = {1, 2, 3, 4};
  table.K = {3, 5, 8, 12, 20};
  const std::vector<double> probs(25, 0.5);
  for (int l = 0; l <= 4; ++l) {
    const KeywordSet got = length_keywords(fx.doc, fx.sentences, probs, l, table);
    CHECK(got.total_keywords() == table.K[static_cast<std::size_t>(l)]);
  }
  CHECK_THROWS_AS(length_keywords(fx.doc, fx.sentences, probs, 5, table),
                  std::invalid_argument);
  CHECK_THROWS_AS(length_keywords(fx.doc, fx.sentences, probs, -1, table),
                  std::invalid_argument);
}

TEST_CASE("length_keywords ranks by probability before position") {
  SelectFixture fx({{"low", "high", "mid"}});
  LengthBucketTable table;
  table.boundaries = {1, 2, 3, 4};
  table.K = {2, 2, 2, 2, 2};
  const KeywordSet got = length_keywords(fx.doc, fx.sentences, {0.1, 0.9, 0.5}, 0, table);
  CHECK(flat_keywords(got) == std::vector<std::string>{"high", "mid"});
}

TEST_CASE("sentence prefilter restricts candidates to the strongest sentences") {
  SelectFixture fx({{"weak", "words"}, {"strong", "terms"}});
  LengthBucketTable table;
  table.boundaries = {1, 2, 3, 4};
  table.K = {4, 4, 4, 4, 4};
  const std::vector<double> probs = {0.1, 0.1, 0.9, 0.9};
  const KeywordSet all = length_keywords(fx.doc, fx.sentences, probs, 0, table);
  CHECK(all.total_keywords() == 4);
  const KeywordSet filtered =
      length_keywords(fx.doc, fx.sentences, probs, 0, table, nullptr, 1);
  CHECK(flat_keywords(filtered) == std::vector<std::string>{"strong", "terms"});
}
