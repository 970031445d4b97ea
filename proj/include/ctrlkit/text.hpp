#pragma once

// Word-level text processing shared by every pipeline stage: whitespace
// tokenization with punctuation detachment, rule-based sentence splitting,
// and token-count truncation. Keyword matching, ROUGE and selection all
// operate on these tokens, so train-time and inference-time keyword spaces
// stay consistent.

#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ctrlkit/util.hpp"

namespace ctrlkit {

struct Token {
  std::string surface;     // verbatim slice of the input text
  std::string lower;       // ASCII-folded surface, used for all matching
  std::size_t char_start;  // byte offsets into the original text
  std::size_t char_end;
};

using TokenSequence = std::vector<Token>;

// Half-open token range [token_start, token_end) within a document.
struct Sentence {
  std::size_t index;
  std::size_t token_start;
  std::size_t token_end;

  std::size_t size() const { return token_end - token_start; }
};

// Abbreviations are stored lowercased; they keep their trailing period at
// tokenization time and never end a sentence.
using AbbrevSet = std::unordered_set<std::string>;

inline const AbbrevSet& default_abbreviations() {
  static const AbbrevSet set = {
      "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "hon.", "st.",
      "gen.", "col.", "maj.", "capt.", "lt.", "sgt.", "sen.", "rep.",
      "gov.", "pres.", "jr.", "sr.", "ph.d.", "m.d.", "b.a.", "m.a.",
      "u.s.", "u.k.", "u.n.", "e.u.", "d.c.", "a.m.", "p.m.",
      "inc.", "ltd.", "co.", "corp.", "dept.", "univ.", "assn.", "bros.",
      "ave.", "blvd.", "rd.", "mt.", "ft.", "no.", "vs.", "etc.",
      "e.g.", "i.e.", "cf.", "al.", "fig.", "vol.", "pp.", "approx.",
      "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
      "sept.", "oct.", "nov.", "dec.",
  };
  return set;
}

inline AbbrevSet load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open abbreviation file: " + path);
  AbbrevSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    set.insert(ascii_lower(line));
  }
  return set;
}

namespace detail {

// Byte length of the whitespace character starting at text[i], or 0.
// Covers ASCII whitespace plus the common Unicode space separators.
inline std::size_t whitespace_len(std::string_view text, std::size_t i) {
  const unsigned char c0 = static_cast<unsigned char>(text[i]);
  if (c0 < 0x80) {
    return (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0D)) ? 1 : 0;
  }
  const std::size_t remain = text.size() - i;
  const auto byte = [&](std::size_t k) {
    return static_cast<unsigned char>(text[i + k]);
  };
  if (c0 == 0xC2 && remain >= 2) {
    const unsigned char c1 = byte(1);
    if (c1 == 0x85 || c1 == 0xA0) return 2;  // NEL, NBSP
  }
  if (c0 == 0xE1 && remain >= 3 && byte(1) == 0x9A && byte(2) == 0x80) {
    return 3;  // U+1680 ogham space
  }
  if (c0 == 0xE2 && remain >= 3 && byte(1) == 0x80) {
    const unsigned char c2 = byte(2);
    if ((c2 >= 0x80 && c2 <= 0x8A) ||  // U+2000..U+200A
        c2 == 0xA8 || c2 == 0xA9 ||    // line / paragraph separator
        c2 == 0xAF) {                  // narrow no-break space
      return 3;
    }
  }
  if (c0 == 0xE2 && remain >= 3 && byte(1) == 0x81 && byte(2) == 0x9F) {
    return 3;  // U+205F medium mathematical space
  }
  if (c0 == 0xE3 && remain >= 3 && byte(1) == 0x80 && byte(2) == 0x80) {
    return 3;  // U+3000 ideographic space
  }
  return 0;
}

inline void push_token(std::string_view text, std::size_t begin, std::size_t end,
                       TokenSequence& out) {
  std::string_view surface = text.substr(begin, end - begin);
  out.push_back(Token{std::string(surface), ascii_lower(surface), begin, end});
}

// Splits one whitespace-delimited chunk into tokens: leading punctuation
// characters come off as single-char tokens, then trailing punctuation,
// except that a remainder matching the abbreviation list is kept whole
// (so "U.S." survives with its periods).
inline void emit_chunk(std::string_view text, std::size_t begin, std::size_t end,
                       const AbbrevSet& abbrevs, TokenSequence& out) {
  std::size_t b = begin;
  while (b < end && is_ascii_punct(text[b])) {
    push_token(text, b, b + 1, out);
    ++b;
  }
  if (b == end) return;

  std::size_t e = end;
  while (e > b && is_ascii_punct(text[e - 1])) {
    if (abbrevs.count(ascii_lower(text.substr(b, e - b))) > 0) break;
    --e;
  }
  push_token(text, b, e, out);
  for (std::size_t k = e; k < end; ++k) push_token(text, k, k + 1, out);
}

inline bool starts_sentence(std::string_view surface) {
  if (surface.empty()) return false;
  const char c = surface[0];
  if (c >= 'A' && c <= 'Z') return true;
  if (c == '"' || c == '\'' || c == '`') return true;
  // Curly opening quotes U+201C / U+2018.
  if (surface.size() >= 3 && static_cast<unsigned char>(surface[0]) == 0xE2 &&
      static_cast<unsigned char>(surface[1]) == 0x80) {
    const unsigned char c2 = static_cast<unsigned char>(surface[2]);
    if (c2 == 0x9C || c2 == 0x98) return true;
  }
  return false;
}

}  // namespace detail

inline TokenSequence tokenize(std::string_view text, const AbbrevSet* abbrevs = nullptr) {
  const AbbrevSet& ab = abbrevs ? *abbrevs : default_abbreviations();
  TokenSequence out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (const std::size_t w = detail::whitespace_len(text, i)) {
      i += w;
      continue;
    }
    const std::size_t start = i;
    while (i < n && detail::whitespace_len(text, i) == 0) ++i;
    detail::emit_chunk(text, start, i, ab, out);
  }
  return out;
}

// Sentence boundary after a token ending in '.', '!' or '?' when the next
// token starts with an uppercase letter or a quote. Abbreviations never end
// a sentence; a trailing partial sentence is always closed.
inline std::vector<Sentence> split_sentences(const TokenSequence& tokens,
                                             const AbbrevSet* abbrevs = nullptr) {
  const AbbrevSet& ab = abbrevs ? *abbrevs : default_abbreviations();
  std::vector<Sentence> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const char last = tokens[i].surface.back();
    if (last != '.' && last != '!' && last != '?') continue;
    if (last == '.' && ab.count(tokens[i].lower) > 0) continue;
    if (!detail::starts_sentence(tokens[i + 1].surface)) continue;
    out.push_back(Sentence{out.size(), start, i + 1});
    start = i + 1;
  }
  if (start < tokens.size()) {
    out.push_back(Sentence{out.size(), start, tokens.size()});
  }
  return out;
}

inline TokenSequence truncate(TokenSequence tokens, std::size_t max_tokens) {
  if (tokens.size() > max_tokens) tokens.resize(max_tokens);
  return tokens;
}

// Cuts text after its max_tokens-th token, preserving the original
// inter-token whitespace of the kept prefix.
inline std::string truncate_text(std::string_view text, std::size_t max_tokens,
                                 const AbbrevSet* abbrevs = nullptr) {
  if (max_tokens == 0) return "";
  const TokenSequence tokens = tokenize(text, abbrevs);
  if (tokens.size() <= max_tokens) return std::string(text);
  return std::string(text.substr(0, tokens[max_tokens - 1].char_end));
}

// Reassembles the verbatim text span covering tokens [begin, end), as sliced
// from the original text.
inline std::string span_text(std::string_view text, const TokenSequence& tokens,
                             std::size_t begin, std::size_t end) {
  if (begin >= end) return "";
  const std::size_t from = tokens[begin].char_start;
  const std::size_t to = tokens[end - 1].char_end;
  return std::string(text.substr(from, to - from));
}

}  // namespace ctrlkit
