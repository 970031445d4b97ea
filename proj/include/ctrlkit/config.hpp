#pragma once

// Run configuration with layered precedence: command-line flags beat
// environment variables, which beat the config file, which beats profile
// defaults. A profile names a bundle of extraction defaults; explicit keys
// from any layer override them.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ctrlkit/tagger.hpp"

namespace ctrlkit {

struct RunConfig {
  std::string profile = "cnndm";
  ExtractionConfig extraction = extraction_profile("cnndm");
  double dropout_rate = 0.5;  // training emission only
  std::uint64_t seed = 0;
  std::string sep_token = "=>";
  std::size_t max_source_tokens = 1024;
  std::size_t max_reference_tokens = 256;
  std::string stopwords_path;      // empty -> built-in list
  std::string abbreviations_path;  // empty -> built-in list
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  try {
    std::size_t consumed = 0;
    const unsigned long long value = std::stoull(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key \"" + key + "\": expected an unsigned integer, got \"" +
                                text + "\"");
  }
}

inline double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key \"" + key + "\": expected a number, got \"" + text +
                                "\"");
  }
}

// One resolution layer: string-valued settings keyed by RunConfig field name.
using ConfigLayer = std::map<std::string, std::string>;

inline void apply_layer(RunConfig& cfg, const ConfigLayer& layer) {
  for (const auto& [key, value] : layer) {
    if (key == "profile") continue;  // applied up front
    if (key == "n_s") {
      cfg.extraction.n_s = parse_u64(value, key);
      if (cfg.extraction.n_s == 0) throw std::invalid_argument("config key \"n_s\": must be positive");
    } else if (key == "epsilon") {
      cfg.extraction.epsilon = parse_real(value, key);
      if (cfg.extraction.epsilon < 0.0 || cfg.extraction.epsilon > 1.0) {
        throw std::invalid_argument("config key \"epsilon\": must be in [0, 1]");
      }
    } else if (key == "m_max") {
      cfg.extraction.m_max = parse_u64(value, key);
      if (cfg.extraction.m_max == 0) {
        throw std::invalid_argument("config key \"m_max\": must be positive");
      }
    } else if (key == "dropout_rate") {
      cfg.dropout_rate = parse_real(value, key);
      if (cfg.dropout_rate < 0.0 || cfg.dropout_rate > 1.0) {
        throw std::invalid_argument("config key \"dropout_rate\": must be in [0, 1]");
      }
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, key);
    } else if (key == "sep_token") {
      if (value.empty()) throw std::invalid_argument("config key \"sep_token\": must be non-empty");
      cfg.sep_token = value;
    } else if (key == "max_source_tokens") {
      cfg.max_source_tokens = parse_u64(value, key);
      if (cfg.max_source_tokens == 0) {
        throw std::invalid_argument("config key \"max_source_tokens\": must be positive");
      }
    } else if (key == "max_reference_tokens") {
      cfg.max_reference_tokens = parse_u64(value, key);
      if (cfg.max_reference_tokens == 0) {
        throw std::invalid_argument("config key \"max_reference_tokens\": must be positive");
      }
    } else if (key == "stopwords") {
      cfg.stopwords_path = value;
    } else if (key == "abbreviations") {
      cfg.abbreviations_path = value;
    } else {
      throw std::invalid_argument("unknown config key \"" + key + "\"");
    }
  }
}

inline ConfigLayer read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open config file \"" + path + "\"");
  }
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": invalid JSON: " + std::string(e.what()));
  }
  if (!record.is_object()) {
    throw std::invalid_argument(path + ": config must be a JSON object");
  }
  ConfigLayer layer;
  for (const auto& [key, value] : record.items()) {
    if (value.is_string()) {
      layer[key] = value.get<std::string>();
    } else if (value.is_number() || value.is_boolean()) {
      layer[key] = value.dump();
    } else {
      throw std::invalid_argument(path + ": config key \"" + key + "\" must be a scalar");
    }
  }
  return layer;
}

}  // namespace detail

using EnvLookup = std::function<const char*(const char*)>;

inline const char* system_env(const char* name) { return std::getenv(name); }

// Resolves the full configuration. `flags` holds only the keys the user set
// explicitly on the command line, as strings.
inline RunConfig load_config(const std::optional<std::string>& config_path,
                             const detail::ConfigLayer& flags,
                             const EnvLookup& env = system_env) {
  detail::ConfigLayer file_layer;
  if (config_path) file_layer = detail::read_config_file(*config_path);

  detail::ConfigLayer env_layer;
  if (const char* seed = env("CTRLKIT_SEED")) env_layer["seed"] = seed;
  if (const char* stopwords = env("CTRLKIT_STOPWORDS")) env_layer["stopwords"] = stopwords;

  std::string profile = "cnndm";
  const detail::ConfigLayer* layers[] = {&file_layer, &env_layer, &flags};
  for (const detail::ConfigLayer* layer : layers) {
    const auto it = layer->find("profile");
    if (it != layer->end()) profile = it->second;
  }
  if (profile != "cnndm" && profile != "arxiv" && profile != "bigpatent" && profile != "custom") {
    throw std::invalid_argument("unknown profile \"" + profile +
                                "\" (expected cnndm, arxiv, bigpatent, or custom)");
  }

  RunConfig cfg;
  cfg.profile = profile;
  // "custom" keeps the toolkit defaults and expects explicit keys.
  cfg.extraction = extraction_profile(profile == "custom" ? "cnndm" : profile);

  detail::apply_layer(cfg, file_layer);
  detail::apply_layer(cfg, env_layer);
  detail::apply_layer(cfg, flags);
  return cfg;
}

// One-line rendering for the run log.
inline std::string describe(const RunConfig& cfg) {
  std::ostringstream out;
  out << "profile=" << cfg.profile << " n_s=" << cfg.extraction.n_s
      << " epsilon=" << cfg.extraction.epsilon << " m_max=" << cfg.extraction.m_max
      << " dropout_rate=" << cfg.dropout_rate << " seed=" << cfg.seed << " sep_token="
      << cfg.sep_token << " max_source_tokens=" << cfg.max_source_tokens
      << " max_reference_tokens=" << cfg.max_reference_tokens << " stopwords="
      << (cfg.stopwords_path.empty() ? "builtin" : cfg.stopwords_path) << " abbreviations="
      << (cfg.abbreviations_path.empty() ? "builtin" : cfg.abbreviations_path);
  return out.str();
}

}  // namespace ctrlkit
