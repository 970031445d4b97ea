#pragma once

// File formats shared by the CLI stages: newline-delimited JSON records with
// strict schemas, written atomically so interrupted runs never leave
// half-files behind.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ctrlkit/metrics.hpp"
#include "ctrlkit/oracle.hpp"
#include "ctrlkit/tagger.hpp"

namespace ctrlkit {

// Writes content to a sibling temp file, then renames it over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open \"" + tmp + "\" for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw std::runtime_error("write to \"" + tmp + "\" failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename \"" + tmp + "\" to \"" + path + "\"");
  }
}

// Calls fn(line_number, record) for every non-blank line; parse failures
// report path and line.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open \"" + path + "\"");
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                               e.what());
    }
    if (!record.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected a JSON object");
    }
    fn(line_no, record);
  }
}

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& record,
                                  const std::vector<std::string>& allowed,
                                  const std::string& where) {
  for (const auto& [key, value] : record.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::runtime_error(where + ": unknown field \"" + key + "\"");
    }
  }
}

inline std::string require_string(const nlohmann::json& record, const std::string& key,
                                  const std::string& where) {
  if (!record.contains(key) || !record[key].is_string()) {
    throw std::runtime_error(where + ": missing or non-string \"" + key + "\"");
  }
  return record[key].get<std::string>();
}

}  // namespace detail

// ---- keyword files: {"id", "keywords": [[str,...],...], "selected_sentences": [int,...]} ----

struct KeywordRecord {
  std::string id;
  KeywordSet keywords;
  std::vector<std::size_t> selected_sentences;  // present only for oracle output
  bool has_selected = false;
};

inline nlohmann::json keyword_record_to_json(const KeywordRecord& record) {
  nlohmann::json groups = nlohmann::json::array();
  for (const KeywordGroup& group : record.keywords.groups) groups.push_back(group.keywords);
  nlohmann::json out = {{"id", record.id}, {"keywords", groups}};
  if (record.has_selected) out["selected_sentences"] = record.selected_sentences;
  return out;
}

inline KeywordRecord parse_keyword_record(const nlohmann::json& record, const std::string& where) {
  detail::reject_unknown_fields(record, {"id", "keywords", "selected_sentences"}, where);
  KeywordRecord out;
  out.id = detail::require_string(record, "id", where);
  if (!record.contains("keywords") || !record["keywords"].is_array()) {
    throw std::runtime_error(where + ": missing or non-array \"keywords\"");
  }
  std::size_t group_index = 0;
  for (const auto& group : record["keywords"]) {
    if (!group.is_array()) {
      throw std::runtime_error(where + ": keyword group must be an array");
    }
    KeywordGroup kg{group_index++, {}};
    for (const auto& keyword : group) {
      if (!keyword.is_string()) {
        throw std::runtime_error(where + ": keyword must be a string");
      }
      kg.keywords.push_back(keyword.get<std::string>());
    }
    out.keywords.groups.push_back(std::move(kg));
  }
  if (record.contains("selected_sentences")) {
    if (!record["selected_sentences"].is_array()) {
      throw std::runtime_error(where + ": \"selected_sentences\" must be an array");
    }
    for (const auto& v : record["selected_sentences"]) {
      if (!v.is_number_unsigned()) {
        throw std::runtime_error(where + ": sentence index must be a non-negative integer");
      }
      out.selected_sentences.push_back(v.get<std::size_t>());
    }
    out.has_selected = true;
  }
  return out;
}

inline std::vector<KeywordRecord> load_keyword_file(const std::string& path) {
  std::vector<KeywordRecord> records;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    records.push_back(parse_keyword_record(record, path + ":" + std::to_string(line_no)));
  });
  return records;
}

// ---- tagger training files: {"id", "tokens": [str,...], "labels": [0|1,...]} ----

inline nlohmann::json tagger_example_to_json(const TaggerExample& example) {
  return {{"id", example.id}, {"tokens", example.tokens}, {"labels", example.labels}};
}

inline TaggerExample parse_tagger_example(const nlohmann::json& record, const std::string& where) {
  detail::reject_unknown_fields(record, {"id", "tokens", "labels"}, where);
  TaggerExample out;
  out.id = detail::require_string(record, "id", where);
  if (!record.contains("tokens") || !record["tokens"].is_array()) {
    throw std::runtime_error(where + ": missing or non-array \"tokens\"");
  }
  for (const auto& token : record["tokens"]) {
    if (!token.is_string()) throw std::runtime_error(where + ": token must be a string");
    out.tokens.push_back(token.get<std::string>());
  }
  if (!record.contains("labels") || !record["labels"].is_array()) {
    throw std::runtime_error(where + ": missing or non-array \"labels\"");
  }
  for (const auto& label : record["labels"]) {
    if (!label.is_number_integer() ||
        (label.get<int>() != 0 && label.get<int>() != 1)) {
      throw std::runtime_error(where + ": labels must be 0 or 1");
    }
    out.labels.push_back(label.get<int>());
  }
  if (out.tokens.size() != out.labels.size()) {
    throw std::runtime_error(where + ": tokens and labels differ in length");
  }
  return out;
}

inline std::vector<TaggerExample> load_tagger_file(const std::string& path) {
  std::vector<TaggerExample> records;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    records.push_back(parse_tagger_example(record, path + ":" + std::to_string(line_no)));
  });
  return records;
}

// ---- probability files: {"id", "probs": [...]} or {"id", "windows": [{"start", "probs"}]} ----

struct ProbsRecord {
  std::string id;
  std::vector<double> probs;        // empty when windows are given
  std::vector<ProbWindow> windows;  // empty when flat probs are given
  bool windowed = false;

  // Flat probabilities aligned to a doc_len-token document.
  std::vector<double> resolve(std::size_t doc_len) const {
    if (!windowed) {
      if (probs.size() != doc_len) {
        throw std::runtime_error("probabilities for \"" + id + "\" cover " +
                                 std::to_string(probs.size()) + " tokens, document has " +
                                 std::to_string(doc_len));
      }
      return probs;
    }
    return merge_window_probs(windows, doc_len);
  }
};

inline ProbsRecord parse_probs_record(const nlohmann::json& record, const std::string& where) {
  detail::reject_unknown_fields(record, {"id", "probs", "windows"}, where);
  ProbsRecord out;
  out.id = detail::require_string(record, "id", where);
  const bool has_probs = record.contains("probs");
  const bool has_windows = record.contains("windows");
  if (has_probs == has_windows) {
    throw std::runtime_error(where + ": need exactly one of \"probs\" or \"windows\"");
  }
  const auto read_prob_array = [&](const nlohmann::json& array, std::vector<double>& into) {
    if (!array.is_array()) {
      throw std::runtime_error(where + ": \"probs\" must be an array");
    }
    for (const auto& v : array) {
      if (!v.is_number()) throw std::runtime_error(where + ": probabilities must be numbers");
      into.push_back(v.get<double>());
    }
  };
  if (has_probs) {
    read_prob_array(record["probs"], out.probs);
    return out;
  }
  out.windowed = true;
  if (!record["windows"].is_array()) {
    throw std::runtime_error(where + ": \"windows\" must be an array");
  }
  for (const auto& window : record["windows"]) {
    if (!window.is_object()) {
      throw std::runtime_error(where + ": window must be an object");
    }
    detail::reject_unknown_fields(window, {"start", "probs"}, where);
    if (!window.contains("start") || !window["start"].is_number_unsigned()) {
      throw std::runtime_error(where + ": window \"start\" must be a non-negative integer");
    }
    ProbWindow pw;
    pw.start = window["start"].get<std::size_t>();
    if (!window.contains("probs")) {
      throw std::runtime_error(where + ": window missing \"probs\"");
    }
    read_prob_array(window["probs"], pw.probs);
    out.windows.push_back(std::move(pw));
  }
  return out;
}

inline std::unordered_map<std::string, ProbsRecord> load_probs_file(const std::string& path) {
  std::unordered_map<std::string, ProbsRecord> records;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    const std::string where = path + ":" + std::to_string(line_no);
    ProbsRecord parsed = parse_probs_record(record, where);
    if (!records.emplace(parsed.id, std::move(parsed)).second) {
      throw std::runtime_error(where + ": duplicate id \"" + record["id"].get<std::string>() +
                               "\"");
    }
  });
  return records;
}

// ---- formatted inputs: {"id", "encoder_text", "decoder_prefix", "target"?} ----

struct FormattedRecord {
  std::string id;
  std::string encoder_text;
  std::string decoder_prefix;
  std::optional<std::string> target;
};

inline nlohmann::json formatted_record_to_json(const FormattedRecord& record) {
  nlohmann::json out = {{"id", record.id},
                        {"encoder_text", record.encoder_text},
                        {"decoder_prefix", record.decoder_prefix}};
  if (record.target) out["target"] = *record.target;
  return out;
}

inline FormattedRecord parse_formatted_record(const nlohmann::json& record,
                                              const std::string& where) {
  detail::reject_unknown_fields(record, {"id", "encoder_text", "decoder_prefix", "target"},
                                where);
  FormattedRecord out;
  out.id = detail::require_string(record, "id", where);
  out.encoder_text = detail::require_string(record, "encoder_text", where);
  out.decoder_prefix = detail::require_string(record, "decoder_prefix", where);
  if (record.contains("target")) {
    out.target = detail::require_string(record, "target", where);
  }
  return out;
}

inline std::vector<FormattedRecord> load_formatted_file(const std::string& path) {
  std::vector<FormattedRecord> records;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    records.push_back(parse_formatted_record(record, path + ":" + std::to_string(line_no)));
  });
  return records;
}

// ---- prediction files: {"id", "summary"} ----

inline std::vector<Prediction> load_predictions_file(const std::string& path) {
  std::vector<Prediction> records;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    const std::string where = path + ":" + std::to_string(line_no);
    detail::reject_unknown_fields(record, {"id", "summary"}, where);
    Prediction out;
    out.id = detail::require_string(record, "id", where);
    out.summary = detail::require_string(record, "summary", where);
    records.push_back(std::move(out));
  });
  return records;
}

// ---- requested length codes: {"id", "bucket"} ----

inline std::unordered_map<std::string, int> load_requested_codes(const std::string& path) {
  std::unordered_map<std::string, int> codes;
  for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& record) {
    const std::string where = path + ":" + std::to_string(line_no);
    detail::reject_unknown_fields(record, {"id", "bucket"}, where);
    const std::string id = detail::require_string(record, "id", where);
    if (!record.contains("bucket") || !record["bucket"].is_number_integer()) {
      throw std::runtime_error(where + ": missing or non-integer \"bucket\"");
    }
    const int bucket = record["bucket"].get<int>();
    if (bucket < 0 || bucket > 4) {
      throw std::runtime_error(where + ": bucket must be in 0..4");
    }
    if (!codes.emplace(id, bucket).second) {
      throw std::runtime_error(where + ": duplicate id \"" + id + "\"");
    }
  });
  return codes;
}

// ---- bucket table: single JSON {"boundaries": [4 reals], "K": [5 ints]} ----

inline nlohmann::json bucket_table_to_json(const LengthBucketTable& table) {
  return {{"boundaries", table.boundaries}, {"K", table.K}};
}

inline LengthBucketTable load_bucket_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open \"" + path + "\"");
  }
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + std::string(e.what()));
  }
  if (!record.is_object()) {
    throw std::runtime_error(path + ": expected a JSON object");
  }
  detail::reject_unknown_fields(record, {"boundaries", "K"}, path);
  if (!record.contains("boundaries") || !record["boundaries"].is_array() ||
      record["boundaries"].size() != 4) {
    throw std::runtime_error(path + ": \"boundaries\" must be an array of 4 numbers");
  }
  if (!record.contains("K") || !record["K"].is_array() || record["K"].size() != 5) {
    throw std::runtime_error(path + ": \"K\" must be an array of 5 integers");
  }
  LengthBucketTable table;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!record["boundaries"][i].is_number()) {
      throw std::runtime_error(path + ": boundaries must be numbers");
    }
    table.boundaries[i] = record["boundaries"][i].get<double>();
    if (i > 0 && table.boundaries[i] < table.boundaries[i - 1]) {
      throw std::runtime_error(path + ": boundaries must be non-decreasing");
    }
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (!record["K"][i].is_number_unsigned() || record["K"][i].get<std::size_t>() == 0) {
      throw std::runtime_error(path + ": K entries must be positive integers");
    }
    table.K[i] = record["K"][i].get<std::size_t>();
  }
  return table;
}

// ---- evaluation report: single JSON document + aligned text table ----

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [name, value] : report.values) {
    if (value) {
      values[name] = *value;
    } else {
      values[name] = nullptr;  // undefined, not zero
    }
  }
  return {{"n", report.n}, {"metrics", values}};
}

inline std::string report_to_table(const EvalReport& report) {
  std::size_t width = 6;
  for (const auto& [name, value] : report.values) width = std::max(width, name.size());
  std::ostringstream out;
  out << "n = " << report.n << "\n";
  for (const auto& [name, value] : report.values) {
    out << name << std::string(width - name.size() + 2, ' ');
    if (value) {
      char buffer[32];
      std::snprintf(buffer, sizeof buffer, "%.4f", *value);
      out << buffer;
    } else {
      out << "undefined";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ctrlkit
