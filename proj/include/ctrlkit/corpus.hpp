#pragma once

// Corpus ingestion: one UTF-8 JSON record per line with fields
//   id (required), source (required), reference, entities, question,
//   gold_answers
// Unknown fields and schema violations are reported with their line number.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ctrlkit {

struct Example {
  std::string id;
  std::string source;
  std::optional<std::string> reference;
  std::vector<std::string> entities;
  std::optional<std::string> question;
  std::vector<std::string> gold_answers;
};

namespace detail {

inline std::runtime_error corpus_error(std::size_t line_no, const std::string& what) {
  return std::runtime_error("corpus line " + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> string_array(const nlohmann::json& value,
                                             const char* field, std::size_t line_no) {
  if (!value.is_array()) throw corpus_error(line_no, std::string(field) + " must be an array of strings");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) throw corpus_error(line_no, std::string(field) + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Example parse_example(const nlohmann::json& record, std::size_t line_no) {
  if (!record.is_object()) throw detail::corpus_error(line_no, "record is not a JSON object");

  Example ex;
  for (const auto& [key, value] : record.items()) {
    if (key == "id") {
      if (!value.is_string()) throw detail::corpus_error(line_no, "id must be a string");
      ex.id = value.get<std::string>();
    } else if (key == "source") {
      if (!value.is_string()) throw detail::corpus_error(line_no, "source must be a string");
      ex.source = value.get<std::string>();
    } else if (key == "reference") {
      if (!value.is_string()) throw detail::corpus_error(line_no, "reference must be a string");
      ex.reference = value.get<std::string>();
    } else if (key == "question") {
      if (!value.is_string()) throw detail::corpus_error(line_no, "question must be a string");
      ex.question = value.get<std::string>();
    } else if (key == "entities") {
      ex.entities = detail::string_array(value, "entities", line_no);
    } else if (key == "gold_answers") {
      ex.gold_answers = detail::string_array(value, "gold_answers", line_no);
    } else {
      throw detail::corpus_error(line_no, "unknown field \"" + key + "\"");
    }
  }

  if (ex.id.empty()) throw detail::corpus_error(line_no, "missing or empty \"id\"");
  if (ex.source.empty()) throw detail::corpus_error(line_no, "missing or empty \"source\"");
  if (ex.question && ex.gold_answers.empty()) {
    throw detail::corpus_error(line_no, "question present but gold_answers empty");
  }
  return ex;
}

inline std::vector<Example> load_corpus(const std::string& path,
                                        std::optional<std::size_t> limit = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<Example> examples;
  std::unordered_map<std::string, std::size_t> seen_ids;  // id -> line number
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (limit && examples.size() >= *limit) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw detail::corpus_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    Example ex = parse_example(record, line_no);

    const auto [it, inserted] = seen_ids.emplace(ex.id, line_no);
    if (!inserted) {
      throw std::runtime_error("duplicate id \"" + ex.id + "\" at lines " +
                               std::to_string(it->second) + " and " + std::to_string(line_no));
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace ctrlkit
