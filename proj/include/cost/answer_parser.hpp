#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cost/lexicon.hpp"
#include "cost/types.hpp"

namespace cost {

namespace parse_detail {

inline const std::unordered_set<std::string_view>& stop_words() {
  static const std::unordered_set<std::string_view> words = {
      "a",       "an",      "the",    "and",      "or",      "of",      "in",     "on",
      "at",      "with",    "to",     "is",       "are",     "be",      "there",  "here",
      "this",    "that",    "these",  "those",    "it",      "its",     "i",      "can",
      "see",     "also",    "some",   "several",  "many",    "few",     "other",  "no",
      "none",    "zero",    "not",    "image",    "images",  "picture", "photo",  "scene",
      "object",  "objects", "item",   "items",    "present", "visible", "order",  "depth",
      "for",     "following", "include", "includes", "including", "total", "count", "counts",
      "sure",    "list",    "plus"};
  return words;
}

inline bool is_stop(std::string_view token) { return stop_words().count(token) != 0; }

/// Lowercase words of [a-z0-9'-]; everything else separates. Leading and
/// trailing hyphens/apostrophes and a possessive "'s" are dropped.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  const auto flush = [&] {
    while (!cur.empty() && (cur.front() == '-' || cur.front() == '\'')) cur.erase(cur.begin());
    if (text::ends_with(cur, "'s")) cur.resize(cur.size() - 2);
    while (!cur.empty() && (cur.back() == '-' || cur.back() == '\'')) cur.pop_back();
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '-' || ch == '\'') {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

/// Splits at list separators: punctuation and the conjunction "and".
inline std::vector<std::vector<std::string>> split_phrases(std::string_view s) {
  std::vector<std::vector<std::string>> phrases;
  std::size_t start = 0;
  const auto emit = [&](std::size_t end) {
    auto tokens = tokenize(s.substr(start, end - start));
    std::vector<std::string> cur;
    for (auto& t : tokens) {
      if (t == "and" || t == "&") {
        if (!cur.empty()) phrases.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(std::move(t));
      }
    }
    if (!cur.empty()) phrases.push_back(std::move(cur));
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == ',' || c == ';' || c == '.' || c == '!' || c == '?' || c == ':' || c == '\n' ||
        c == '(' || c == ')') {
      emit(i);
      start = i + 1;
    }
  }
  emit(s.size());
  return phrases;
}

/// Locates a template prefix; returns the text after it up to the end of
/// that sentence, or nullopt when the prefix is absent.
inline std::optional<std::string> anchored_region(const std::string& lowered,
                                                  std::initializer_list<std::string_view> prefixes) {
  for (auto prefix : prefixes) {
    const auto pos = lowered.find(prefix);
    if (pos == std::string::npos) continue;
    std::size_t begin = pos + prefix.size();
    while (begin < lowered.size() && (lowered[begin] == ':' || lowered[begin] == ' ')) ++begin;
    std::size_t end = lowered.find_first_of(".!?", begin);
    if (end == std::string::npos) end = lowered.size();
    return lowered.substr(begin, end - begin);
  }
  return std::nullopt;
}

/// Splits "<word>-<k>" (k >= 2) into word and ordinal.
inline InstanceLabel split_suffix(const std::string& token) {
  return InstanceLabel::from_string(token);
}

struct NounMatch {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  InstanceLabel label;
};

inline std::string join(const std::vector<std::string>& tokens, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out += ' ';
    out += tokens[i];
  }
  return out;
}

/// Longest inventory noun starting at `i`. An instance suffix may sit on the
/// final token of the span.
inline std::optional<NounMatch> match_at(const Lexicon& lex, const std::vector<std::string>& tokens,
                                         std::size_t i) {
  const std::size_t max_len = std::min(lex.max_phrase_words(), tokens.size() - i);
  for (std::size_t len = max_len; len >= 1; --len) {
    const auto last = split_suffix(tokens[i + len - 1]);
    std::string span = join(tokens, i, i + len - 1);
    if (!span.empty()) span += ' ';
    span += last.noun;
    if (word_to_count(span)) continue;
    const std::string noun = lex.normalize(span);
    if (lex.is_object_noun(noun)) return NounMatch{i, i + len, InstanceLabel{noun, last.ordinal}};
  }
  return std::nullopt;
}

/// Nearest count word in tokens[lo, hi); 0 for "no"/"zero", 1 when absent.
inline int preceding_count(const std::vector<std::string>& tokens, std::size_t lo, std::size_t hi) {
  for (std::size_t k = hi; k > lo; --k) {
    const std::string& t = tokens[k - 1];
    if (t == "no" || t == "zero") return 0;
    if (k - 1 > lo) {
      if (auto c = word_to_count(tokens[k - 2] + " " + t)) return *c;
    }
    if (auto c = word_to_count(t)) return *c;
  }
  return 1;
}

inline bool is_content_token(const std::string& t) {
  if (is_stop(t) || word_to_count(t)) return false;
  return std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

inline std::vector<NounMatch> scan_matches(const Lexicon& lex,
                                           const std::vector<std::string>& tokens) {
  std::vector<NounMatch> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (auto m = match_at(lex, tokens, i)) {
      i = m->end;
      out.push_back(std::move(*m));
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace parse_detail

inline constexpr std::string_view kCountTemplatePrefix = "The objects present in the image are:";
inline constexpr std::string_view kDepthTemplatePrefix =
    "The depth order for objects present in the image is:";
inline constexpr std::string_view kNoObjectsSentence = "There are no objects in the image.";

/// Extracts noun -> count pairs from a ground-truth or model sentence.
///
/// Inside the answer template every comma/"and" separated phrase yields a
/// noun; phrases without a lexicon noun fall back to their last content word.
/// Outside the template only lexicon nouns are collected. Same-noun counts sum.
inline ObjectCountMap parse_object_counts(std::string_view response, const Lexicon& lex) {
  using namespace parse_detail;
  ObjectCountMap out;
  const std::string lowered = text::to_lower(response);
  const auto region = anchored_region(
      lowered, {"objects present in the image are", "objects present in this image are"});
  const bool anchored = region.has_value();

  for (const auto& phrase : split_phrases(anchored ? *region : lowered)) {
    const auto matches = scan_matches(lex, phrase);
    if (!matches.empty()) {
      std::size_t prev_end = 0;
      for (const auto& m : matches) {
        out.add(m.label.noun, preceding_count(phrase, prev_end, m.begin));
        prev_end = m.end;
      }
      continue;
    }
    if (!anchored) continue;
    for (std::size_t k = phrase.size(); k > 0; --k) {
      if (!is_content_token(phrase[k - 1])) continue;
      const auto head = split_suffix(phrase[k - 1]);
      out.add(lex.normalize(head.noun), preceding_count(phrase, 0, k - 1));
      break;
    }
  }
  return out;
}

/// Extracts the nearest-first instance labels from a depth-order sentence.
inline DepthOrder parse_depth_order(std::string_view response, const Lexicon& lex) {
  using namespace parse_detail;
  DepthOrder out;
  const std::string lowered = text::to_lower(response);
  const auto region = anchored_region(
      lowered, {"depth order for objects present in the image is",
                "depth order for objects present in this image is", "depth order for objects is",
                "depth order is"});

  if (!region) {
    for (const auto& phrase : split_phrases(lowered))
      for (auto& m : scan_matches(lex, phrase)) out.items.push_back(std::move(m.label));
    return out;
  }

  for (const auto& phrase : split_phrases(*region)) {
    std::vector<std::string> kept;
    for (const auto& t : phrase) {
      const auto bare = split_suffix(t).noun;
      if (is_stop(bare) || word_to_count(bare)) continue;
      kept.push_back(t);
    }
    if (kept.empty()) continue;
    const auto last = split_suffix(kept.back());
    kept.back() = last.noun;
    out.items.push_back(InstanceLabel{lex.normalize(join(kept, 0, kept.size())), last.ordinal});
  }
  return out;
}

}  // namespace cost
