#pragma once

// Control-token assembly: keywords and/or prompts become the text prepended
// to the encoder input and, for prompts, the prefix the decoder starts from.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctrlkit/corpus.hpp"
#include "ctrlkit/oracle.hpp"
#include "ctrlkit/text.hpp"
#include "ctrlkit/util.hpp"

namespace ctrlkit {

// Where a prompt participates: encoder keyword region, decoder prefix, or both.
enum class PromptMode { prefix_and_keywords, prefix_only, keywords_only };

inline PromptMode parse_prompt_mode(const std::string& name) {
  if (name == "prefix_and_keywords" || name == "both") return PromptMode::prefix_and_keywords;
  if (name == "prefix_only" || name == "prefix") return PromptMode::prefix_only;
  if (name == "keywords_only" || name == "keywords") return PromptMode::keywords_only;
  throw std::invalid_argument("unknown prompt mode \"" + name + "\"");
}

struct ControlSpec {
  KeywordSet keywords;
  std::optional<std::string> prompt;
  PromptMode prompt_mode = PromptMode::prefix_and_keywords;
  bool group_separators = true;  // "|" between sentence groups when rendering
};

struct FormattedInput {
  std::string encoder_text;
  std::string decoder_prefix;
};

// Keywords joined by single spaces; sentence groups joined by " | " when
// requested. Never emits leading, trailing, or doubled separators.
inline std::string render_keywords(const KeywordSet& keywords, bool with_group_separators) {
  std::vector<std::string> groups;
  groups.reserve(keywords.groups.size());
  for (const KeywordGroup& group : keywords.groups) {
    if (group.keywords.empty()) continue;
    groups.push_back(join(group.keywords, " "));
  }
  return join(groups, with_group_separators ? " | " : " ");
}

enum class PromptKind { contribution, purpose, qa };

inline PromptKind parse_prompt_kind(const std::string& name) {
  if (name == "contribution") return PromptKind::contribution;
  if (name == "purpose") return PromptKind::purpose;
  if (name == "qa") return PromptKind::qa;
  throw std::invalid_argument("unknown prompt kind \"" + name + "\"");
}

// Pinned prompt templates. The default contribution form is pre-tokenized for
// word-level models; compact=true emits the raw untokenized variant instead.
inline std::string make_prompt(PromptKind kind, const std::optional<std::string>& question = {},
                               bool compact = false) {
  switch (kind) {
    case PromptKind::contribution:
      return compact ? "the main contributions of this paper are:(1)"
                     : "the main contributions of this paper are : ( 1 )";
    case PromptKind::purpose:
      return "the purpose of the present invention is";
    case PromptKind::qa:
      if (!question || question->empty()) {
        throw std::invalid_argument("qa prompt requires a question");
      }
      return "Q: " + *question + " A:";
  }
  throw std::invalid_argument("unknown prompt kind");
}

// Entity control: each requested entity becomes its own group, kept verbatim
// as a single keyword (no stopword filtering; the user asked for it), with
// group separators off so multi-entity requests render as plain text.
inline ControlSpec entity_control(const std::vector<std::string>& entities) {
  if (entities.empty()) {
    throw std::invalid_argument("entity_control: no entities given");
  }
  ControlSpec spec;
  spec.group_separators = false;
  spec.keywords.groups.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].empty()) {
      throw std::invalid_argument("entity_control: entity " + std::to_string(i) + " is empty");
    }
    spec.keywords.groups.push_back(KeywordGroup{i, {entities[i]}});
  }
  return spec;
}

// Assembles encoder text as "<control> <sep> <source>" (empty control parts
// collapse away) and the decoder prefix per the prompt mode. The separator
// must not occur inside the rendered control region, otherwise the source
// would no longer be recoverable as the text after the first separator.
inline FormattedInput format_input(const ControlSpec& spec, const std::string& source,
                                   const std::string& separator = "=>") {
  if (separator.empty()) {
    throw std::invalid_argument("format_input: separator must be non-empty");
  }
  std::string control = render_keywords(spec.keywords, spec.group_separators);
  if (spec.prompt && spec.prompt_mode != PromptMode::prefix_only) {
    control = control.empty() ? *spec.prompt : control + " " + *spec.prompt;
  }
  if (control.find(separator) != std::string::npos) {
    throw std::invalid_argument("format_input: control tokens contain the separator \"" +
                                separator + "\"");
  }

  std::vector<std::string> parts;
  if (!control.empty()) parts.push_back(control);
  parts.push_back(separator);
  if (!source.empty()) parts.push_back(source);

  FormattedInput out;
  out.encoder_text = join(parts, " ");
  if (spec.prompt && spec.prompt_mode != PromptMode::keywords_only) {
    out.decoder_prefix = *spec.prompt;
  }
  return out;
}

struct TrainingPair {
  std::string encoder_text;
  std::string target;
};

struct TrainingPairConfig {
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;
  std::string separator = "=>";
  std::size_t max_source_tokens = 1024;
  std::size_t max_reference_tokens = 256;
  const AbbrevSet* abbreviations = nullptr;
};

// One training record: keywords after dropout, rendered with group
// separators, prepended to the truncated source; the truncated reference is
// the generation target.
inline TrainingPair emit_training_pairs(const Example& example, const KeywordSet& keywords,
                                        const TrainingPairConfig& cfg = {}) {
  if (!example.reference) {
    throw std::invalid_argument("emit_training_pairs: example \"" + example.id +
                                "\" has no reference summary");
  }
  const KeywordSet kept = dropout_keywords(keywords, cfg.dropout_rate, cfg.seed);

  ControlSpec spec;
  spec.keywords = kept;
  const std::string source = truncate_text(example.source, cfg.max_source_tokens,
                                           cfg.abbreviations);

  TrainingPair pair;
  pair.encoder_text = format_input(spec, source, cfg.separator).encoder_text;
  pair.target = truncate_text(*example.reference, cfg.max_reference_tokens, cfg.abbreviations);
  return pair;
}

}  // namespace ctrlkit
