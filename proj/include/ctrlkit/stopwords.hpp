#pragma once

// Pinned English stopword list (179 entries) used by keyword extraction and
// selection. Tokens are filtered on their lowercase form; tokens without any
// alphanumeric character (bare punctuation) are treated as stopwords too, so
// they never surface as keywords.

#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "ctrlkit/util.hpp"

namespace ctrlkit {

using StopwordSet = std::unordered_set<std::string>;

inline const StopwordSet& default_stopwords() {
  static const StopwordSet set = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves",
      "you", "you're", "you've", "you'll", "you'd", "your", "yours",
      "yourself", "yourselves", "he", "him", "his", "himself", "she",
      "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "that'll", "these", "those", "am",
      "is", "are", "was", "were", "be", "been", "being", "have", "has",
      "had", "having", "do", "does", "did", "doing", "a", "an", "the",
      "and", "but", "if", "or", "because", "as", "until", "while", "of",
      "at", "by", "for", "with", "about", "against", "between", "into",
      "through", "during", "before", "after", "above", "below", "to",
      "from", "up", "down", "in", "out", "on", "off", "over", "under",
      "again", "further", "then", "once", "here", "there", "when",
      "where", "why", "how", "all", "any", "both", "each", "few",
      "more", "most", "other", "some", "such", "no", "nor", "not",
      "only", "own", "same", "so", "than", "too", "very", "s", "t",
      "can", "will", "just", "don", "don't", "should", "should've",
      "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren",
      "aren't", "couldn", "couldn't", "didn", "didn't", "doesn",
      "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven",
      "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn",
      "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
      "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
      "won't", "wouldn", "wouldn't",
  };
  return set;
}

// One entry per line; blank lines and '#' comments ignored.
inline StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    set.insert(ascii_lower(line));
  }
  return set;
}

// A token is eligible as a keyword iff it is not a stopword and contains at
// least one alphanumeric character.
inline bool keyword_eligible(const std::string& lower, const StopwordSet& stopwords) {
  return has_alnum(lower) && stopwords.count(lower) == 0;
}

}  // namespace ctrlkit
