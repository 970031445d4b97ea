#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "ctrlkit/corpus.hpp"
#include "ctrlkit/metrics.hpp"
#include "test_helpers.hpp"

using namespace ctrlkit;
using namespace testutil;

TEST_CASE("success rate counts contiguous case-insensitive mentions") {
  CHECK(success_rate({"ISIS attacked the base", "the ISIS unit"}, {"ISIS", "isis"}) == 1.0);
  CHECK(success_rate({"nothing here", "still nothing"}, {"ISIS", "ISIS"}) == 0.0);
  CHECK(success_rate({"ISIS attacked", "empty words"}, {"ISIS", "ISIS"}) == 0.5);
}

TEST_CASE("multi-token entities must appear contiguously") {
  CHECK(success_rate({"troops from camp speicher left"}, {"Camp Speicher"}) == 1.0);
  CHECK(success_rate({"the camp north of speicher"}, {"Camp Speicher"}) == 0.0);
}

TEST_CASE("entity matching ignores surrounding punctuation") {
  CHECK(success_rate({"They reached Tikrit."}, {"Tikrit"}) == 1.0);
}

TEST_CASE("success rate validates its inputs") {
  CHECK_THROWS_AS(success_rate({"a"}, {"x", "y"}), std::invalid_argument);
  CHECK_THROWS_AS(success_rate({}, {}), std::invalid_argument);
  // An entity with no tokens can never be mentioned.
  CHECK(success_rate({"a"}, {""}) == 0.0);
}

TEST_CASE("mad is the mean absolute deviation of bucket codes") {
  CHECK(mad({0, 1, 2}, {0, 1, 2}) == 0.0);
  CHECK(mad({0, 4}, {4, 0}) == 4.0);
  CHECK(mad({1, 2, 3}, {2, 2, 2}) == (1.0 + 0.0 + 1.0) / 3.0);
}

TEST_CASE("mad validates lengths and code range") {
  CHECK_THROWS_AS(mad({0}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(mad({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(mad({5}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(mad({0}, {-1}), std::invalid_argument);
}

TEST_CASE("pcc matches perfect correlation and anticorrelation") {
  const std::optional<double> up = pcc({0, 1, 2}, {0, 1, 2});
  REQUIRE(up.has_value());
  CHECK(std::abs(*up - 1.0) <= 1e-9);
  const std::optional<double> down = pcc({0, 1, 2}, {2, 1, 0});
  REQUIRE(down.has_value());
  CHECK(std::abs(*down + 1.0) <= 1e-9);
}

TEST_CASE("pcc is undefined on zero variance, not zero") {
  CHECK_FALSE(pcc({1, 1, 1}, {0, 1, 2}).has_value());
  CHECK_FALSE(pcc({0, 1, 2}, {7, 7, 7}).has_value());
}

TEST_CASE("pcc validates its inputs") {
  CHECK_THROWS_AS(pcc({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(pcc({}, {}), std::invalid_argument);
}

TEST_CASE("answer normalization lowercases, strips punctuation, drops articles") {
  CHECK(qa_normalize("An Apple, a Day.") == std::vector<std::string>{"apple", "day"});
  CHECK(qa_normalize("The THE the") == std::vector<std::string>{});
  CHECK(qa_normalize("") == std::vector<std::string>{});
  CHECK(qa_normalize("Camp Speicher") == std::vector<std::string>{"camp", "speicher"});
}

TEST_CASE("qa token F1 matches the pinned hand computation") {
  CHECK(qa_f1("Camp Speicher", {"Camp Speicher"}) == 1.0);
  CHECK(qa_f1("Camp Speicher near the city of Tikrit", {"Camp Speicher"}) == 0.5);
  CHECK(qa_f1("entirely wrong", {"Camp Speicher"}) == 0.0);
}

TEST_CASE("qa token F1 takes the best gold answer") {
  CHECK(qa_f1("sixty", {"sixty beds", "sixty"}) == 1.0);
  CHECK_THROWS_AS(qa_f1("anything", {}), std::invalid_argument);
}

TEST_CASE("qa token F1 ignores articles and case in the prediction") {
  CHECK(qa_f1("The Tikrit", {"tikrit"}) == 1.0);
  CHECK(qa_f1("TIKRIT!", {"Tikrit"}) == 1.0);
}

TEST_CASE("qa token F1 of two empty-normalizing strings is one") {
  CHECK(qa_f1("the a an", {"the"}) == 1.0);
  CHECK(qa_f1("something", {"the"}) == 0.0);
}

namespace {

std::vector<Example> tiny_corpus() {
  Example a;
  a.id = "a";
  a.source = "Troops reached the camp. It was quiet.";
  a.reference = "Troops reached the camp.";
  a.entities = {"Troops"};
  Example b;
  b.id = "b";
  b.source = "The dam failed early. Water rose fast.";
  b.reference = "The dam failed early.";
  b.entities = {"dam"};
  b.question = "What failed";
  b.gold_answers = {"the dam"};
  return {a, b};
}

LengthBucketTable tiny_table() {
  LengthBucketTable table;
  table.boundaries = {2.0, 4.0, 6.0, 8.0};
  table.K = {1, 2, 3, 4, 5};
  return table;
}

}  // namespace

TEST_CASE("rouge-only evaluation reports exactly the three rouge keys") {
  const std::vector<Prediction> preds = {{"a", "Troops reached the camp.", {}},
                                         {"b", "The dam failed early.", {}}};
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"rouge"});
  CHECK(report.n == 2);
  REQUIRE(report.values.size() == 3);
  CHECK(report.values.count("rouge1") == 1);
  CHECK(report.values.count("rouge2") == 1);
  CHECK(report.values.count("rougeL") == 1);
  CHECK(*report.values.at("rouge1") == 1.0);
  CHECK(*report.values.at("rougeL") == 1.0);
}

TEST_CASE("length aspect needs a bucket table") {
  const std::vector<Prediction> preds = {{"a", "x", {}}, {"b", "y", {}}};
  CHECK_THROWS_AS(evaluate_run(preds, tiny_corpus(), {"length"}), std::invalid_argument);
}

TEST_CASE("length aspect reports mad and pcc of bucket codes") {
  // Summaries land in the same bucket as their references: mad = 0.
  const std::vector<Prediction> preds = {{"a", "one two three four five", {}},
                                         {"b", "uno dos tres cuatro cinco", {}}};
  const LengthBucketTable table = tiny_table();
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"length"}, &table);
  REQUIRE(report.values.count("mad") == 1);
  REQUIRE(report.values.count("pcc") == 1);
  CHECK(*report.values.at("mad") == 0.0);
  // Both references have the same bucket code: requested codes are constant,
  // so the correlation is undefined.
  CHECK_FALSE(report.values.at("pcc").has_value());
}

TEST_CASE("requested bucket codes feed the pcc input side") {
  std::vector<Prediction> preds = {{"a", "one two", 0},
                                   {"b", "uno dos tres cuatro cinco", 2}};
  const LengthBucketTable table = tiny_table();
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"length"}, &table);
  REQUIRE(report.values.at("pcc").has_value());
  CHECK(std::abs(*report.values.at("pcc") - 1.0) <= 1e-9);
}

TEST_CASE("missing prediction ids are reported by name") {
  const std::vector<Prediction> preds = {{"zz", "text", {}}};
  CHECK_THROWS_WITH(evaluate_run(preds, tiny_corpus(), {"rouge"}),
                    Catch::Matchers::ContainsSubstring("zz"));
}

TEST_CASE("duplicate predictions are rejected") {
  const std::vector<Prediction> preds = {{"a", "x", {}}, {"a", "y", {}}};
  CHECK_THROWS_AS(evaluate_run(preds, tiny_corpus(), {"rouge"}), std::invalid_argument);
}

TEST_CASE("unknown or empty aspect sets are rejected") {
  const std::vector<Prediction> preds = {{"a", "x", {}}};
  CHECK_THROWS_AS(evaluate_run(preds, tiny_corpus(), {"bleu"}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_run(preds, tiny_corpus(), {}), std::invalid_argument);
}

TEST_CASE("success rate aspect uses each example's entities") {
  const std::vector<Prediction> preds = {{"a", "Troops won", {}}, {"b", "nothing", {}}};
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"success_rate"});
  CHECK(*report.values.at("success_rate") == 0.5);
}

TEST_CASE("qa aspect averages token F1 over question-bearing examples") {
  const std::vector<Prediction> preds = {{"a", "unrelated", {}}, {"b", "the dam", {}}};
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"qa"});
  // Only example b has a question; its answer matches exactly.
  CHECK(*report.values.at("qa_f1") == 1.0);
}

TEST_CASE("qa aspect requires at least one question") {
  std::vector<Example> corpus = tiny_corpus();
  corpus[1].question.reset();
  corpus[1].gold_answers.clear();
  const std::vector<Prediction> preds = {{"a", "x", {}}, {"b", "y", {}}};
  CHECK_THROWS_AS(evaluate_run(preds, corpus, {"qa"}), std::invalid_argument);
}

TEST_CASE("success rate aspect requires entities somewhere in the corpus") {
  std::vector<Example> corpus = tiny_corpus();
  corpus[0].entities.clear();
  corpus[1].entities.clear();
  const std::vector<Prediction> preds = {{"a", "x", {}}, {"b", "y", {}}};
  CHECK_THROWS_AS(evaluate_run(preds, corpus, {"success_rate"}), std::invalid_argument);
}

TEST_CASE("a corpus superset is fine as long as every prediction resolves") {
  const std::vector<Prediction> preds = {{"a", "Troops reached the camp.", {}}};
  const EvalReport report = evaluate_run(preds, tiny_corpus(), {"rouge"});
  CHECK(report.n == 1);
}

TEST_CASE("evaluation over the mini corpus with its own references is perfect") {
  const std::vector<Example> corpus = load_corpus(data_path("mini_corpus.jsonl"));
  std::vector<Prediction> preds;
  for (const Example& ex : corpus) preds.push_back({ex.id, *ex.reference, {}});
  const EvalReport report = evaluate_run(preds, corpus, {"rouge"});
  CHECK(report.n == 20);
  CHECK(*report.values.at("rouge1") == 1.0);
  CHECK(*report.values.at("rouge2") == 1.0);
  CHECK(*report.values.at("rougeL") == 1.0);
}
