#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cost/default_data.hpp"
#include "cost/error.hpp"

namespace cost {

namespace text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace text

namespace detail {

inline constexpr std::array<std::string_view, 20> kUnits = {
    "",        "one",     "two",       "three",    "four",    "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

inline constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

inline std::optional<int> unit_value(std::string_view w) {
  for (std::size_t i = 1; i < kUnits.size(); ++i)
    if (kUnits[i] == w) return static_cast<int>(i);
  return std::nullopt;
}

inline std::optional<int> tens_value(std::string_view w) {
  for (std::size_t i = 2; i < kTens.size(); ++i)
    if (kTens[i] == w) return static_cast<int>(i * 10);
  return std::nullopt;
}

}  // namespace detail

/// Largest count expressible as English number words.
inline constexpr int kMaxNumeralWord = 99;

/// English words for 1..99 ("twenty-one"); other values fall back to digits.
inline std::string count_to_words(int k) {
  if (k < 1 || k > kMaxNumeralWord) return std::to_string(k);
  if (k < 20) return std::string(detail::kUnits[static_cast<std::size_t>(k)]);
  std::string out(detail::kTens[static_cast<std::size_t>(k / 10)]);
  if (k % 10 != 0) {
    out += '-';
    out += detail::kUnits[static_cast<std::size_t>(k % 10)];
  }
  return out;
}

/// Parses a count token. Accepts number words 1..99 (compound tens joined by
/// a hyphen or a single space), positive digit strings, and "a"/"an" as 1.
inline std::optional<int> word_to_count(std::string_view token) {
  const std::string w = text::to_lower(text::trim(token));
  if (w.empty()) return std::nullopt;
  if (w == "a" || w == "an") return 1;

  if (std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc{} || ptr != w.data() + w.size() || value < 1) return std::nullopt;
    return value;
  }

  if (auto u = detail::unit_value(w)) return u;
  if (auto t = detail::tens_value(w)) return t;

  const auto sep = w.find_first_of("- ");
  if (sep == std::string::npos) return std::nullopt;
  const auto tens = detail::tens_value(std::string_view(w).substr(0, sep));
  const auto unit = detail::unit_value(std::string_view(w).substr(sep + 1));
  if (tens && unit && *unit < 10) return *tens + *unit;
  return std::nullopt;
}

/// Synonym, inflection and noun-inventory tables.
///
/// A Lexicon is immutable once built. All lookups operate on lowercase text;
/// multi-word nouns are stored with single spaces ("dining table").
class Lexicon {
public:
  Lexicon() = default;

  /// Parses the line-oriented lexicon format. Throws FormatError (with the
  /// 1-based line number) or ValidationError.
  static Lexicon parse(std::istream& in, std::string_view source = "<lexicon>") {
    Lexicon lex;
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& what) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = text::trim(line);
      if (body.empty() || body.front() == '#') continue;
      const auto fields = text::split_ws(body);
      const std::string kind = text::to_lower(fields[0]);
      if (kind == "noun") {
        if (fields.size() != 2) fail("expected 'noun <canonical>'");
        lex.nouns_.insert(decode_field(fields[1]));
      } else if (kind == "syn") {
        if (fields.size() != 3) fail("expected 'syn <surface> <canonical>'");
        const auto surface = decode_field(fields[1]);
        const auto canonical = decode_field(fields[2]);
        if (surface == canonical) fail("synonym maps '" + surface + "' onto itself");
        const auto [it, inserted] = lex.synonyms_.emplace(surface, canonical);
        if (!inserted && it->second != canonical)
          fail("conflicting synonym for '" + surface + "'");
      } else if (kind == "plural") {
        if (fields.size() != 3) fail("expected 'plural <plural> <singular>'");
        const auto plural = decode_field(fields[1]);
        const auto singular = decode_field(fields[2]);
        if (plural == singular) fail("plural equals singular for '" + plural + "'");
        const auto [it, inserted] = lex.plural_to_singular_.emplace(plural, singular);
        if (!inserted && it->second != singular) fail("conflicting plural '" + plural + "'");
        lex.singular_to_plural_.emplace(singular, plural);
      } else {
        fail("unknown record kind '" + fields[0] + "'");
      }
    }
    lex.finalize(source);
    return lex;
  }

  static Lexicon parse_text(std::string_view content, std::string_view source = "<lexicon>") {
    std::istringstream in{std::string(content)};
    return parse(in, source);
  }

  /// The shipped default (COCO categories plus person synonyms).
  static const Lexicon& builtin() {
    static const Lexicon lex = parse_text(detail::kDefaultLexiconText, "<builtin lexicon>");
    return lex;
  }

  /// Singularize, then map synonyms onto their canonical noun. Idempotent.
  std::string normalize(std::string_view word) const {
    std::string w = collapse_spaces(text::to_lower(text::trim(word)));
    // Every step either shortens the word or lands on a known form.
    for (;;) {
      std::string next = singularize_once(w);
      if (next == w) break;
      w = std::move(next);
    }
    if (auto it = synonyms_.find(w); it != synonyms_.end()) return it->second;
    return w;
  }

  /// Surface form for `count` instances of `noun`.
  std::string pluralize(std::string_view noun, int count) const {
    std::string n(noun);
    if (count <= 1) return n;
    if (auto it = singular_to_plural_.find(n); it != singular_to_plural_.end()) return it->second;
    const auto space = n.rfind(' ');
    const std::string head = space == std::string::npos ? std::string() : n.substr(0, space + 1);
    const std::string last = space == std::string::npos ? n : n.substr(space + 1);
    if (auto it = singular_to_plural_.find(last); it != singular_to_plural_.end())
      return head + it->second;
    return head + regular_plural(last);
  }

  /// True when `noun` (already normalized) is a canonical object noun.
  bool is_object_noun(std::string_view noun) const { return nouns_.count(std::string(noun)) != 0; }

  /// True for any form the tables know verbatim (canonical, synonym key, irregular singular).
  bool is_known_form(std::string_view word) const {
    const std::string w(word);
    return nouns_.count(w) || synonyms_.count(w) || singular_to_plural_.count(w);
  }

  /// Word count of the longest multi-word form in the tables (>= 1).
  std::size_t max_phrase_words() const { return max_phrase_words_; }

  const std::unordered_map<std::string, std::string>& synonyms() const { return synonyms_; }
  const std::unordered_map<std::string, std::string>& irregular_plurals() const {
    return plural_to_singular_;
  }
  const std::unordered_set<std::string>& object_nouns() const { return nouns_; }

  /// Canonical nouns in lexicographic order (stable iteration for generators).
  std::vector<std::string> sorted_object_nouns() const {
    std::vector<std::string> out(nouns_.begin(), nouns_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  static std::string collapse_spaces(const std::string& s) {
    std::string out;
    for (const auto& w : text::split_ws(s)) {
      if (!out.empty()) out += ' ';
      out += w;
    }
    return out;
  }

  static std::string decode_field(std::string_view f) {
    std::string out = text::to_lower(f);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
  }

  static std::string regular_plural(const std::string& w) {
    if (w.size() >= 2 && w.back() == 'y' && !text::is_vowel(w[w.size() - 2]))
      return w.substr(0, w.size() - 1) + "ies";
    if (text::ends_with(w, "s") || text::ends_with(w, "x") || text::ends_with(w, "ch") ||
        text::ends_with(w, "sh"))
      return w + "es";
    return w + "s";
  }

  // A word that still looks plural after stripping would be stripped again.
  static bool guarded_s(std::string_view w) {
    return text::ends_with(w, "ss") || text::ends_with(w, "us") || text::ends_with(w, "is");
  }

  std::string singularize_once(const std::string& w) const {
    if (w.empty() || is_known_form(w)) return w;
    if (auto it = plural_to_singular_.find(w); it != plural_to_singular_.end()) return it->second;

    const auto space = w.rfind(' ');
    const std::string head = space == std::string::npos ? std::string() : w.substr(0, space + 1);
    const std::string last = space == std::string::npos ? w : w.substr(space + 1);
    if (auto it = plural_to_singular_.find(last); it != plural_to_singular_.end())
      return head + it->second;
    if (last.size() < 3 || last.back() != 's') return w;

    const std::string strip_s = last.substr(0, last.size() - 1);
    const std::string strip_es = last.substr(0, last.size() - 2);
    const bool ies = last.size() > 3 && text::ends_with(last, "ies");
    const std::string y_form = ies ? last.substr(0, last.size() - 3) + "y" : std::string();

    // Prefer a candidate the tables know.
    if (is_known_form(head + strip_s)) return head + strip_s;
    if (ies && is_known_form(head + y_form)) return head + y_form;
    if (text::ends_with(last, "es") && is_known_form(head + strip_es)) return head + strip_es;

    if (ies) return head + y_form;
    if (text::ends_with(last, "xes") || text::ends_with(last, "ches") ||
        text::ends_with(last, "shes") || text::ends_with(last, "sses"))
      return head + strip_es;
    if (guarded_s(last)) return w;
    return head + strip_s;
  }

  void finalize(std::string_view source) {
    const std::string where(source);
    for (const auto& [surface, canonical] : synonyms_) {
      if (synonyms_.count(canonical))
        throw ValidationError(where + ": canonical noun '" + canonical +
                              "' is also a synonym key ('" + surface + "' -> '" + canonical +
                              "' -> '" + synonyms_.at(canonical) + "')");
      nouns_.insert(canonical);
    }
    for (const auto& noun : nouns_) {
      if (noun.find('-') != std::string::npos)
        throw ValidationError(where + ": canonical noun '" + noun + "' contains '-'");
      if (synonyms_.count(noun))
        throw ValidationError(where + ": '" + noun + "' is both a noun and a synonym key");
      if (plural_to_singular_.count(noun))
        throw ValidationError(where + ": canonical noun '" + noun + "' is an irregular plural");
    }
    for (const auto& [plural, singular] : plural_to_singular_) {
      if (plural_to_singular_.count(singular))
        throw ValidationError(where + ": irregular singular '" + singular +
                              "' is itself listed as a plural");
    }
    const auto words = [](const std::string& s) {
      return static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1;
    };
    for (const auto& n : nouns_) max_phrase_words_ = std::max(max_phrase_words_, words(n));
    for (const auto& [k, v] : synonyms_) max_phrase_words_ = std::max(max_phrase_words_, words(k));
  }

  std::unordered_map<std::string, std::string> synonyms_;
  std::unordered_map<std::string, std::string> plural_to_singular_;
  std::unordered_map<std::string, std::string> singular_to_plural_;
  std::unordered_set<std::string> nouns_;
  std::size_t max_phrase_words_ = 1;
};

/// Loads a lexicon file, or the builtin default when `path` is empty.
inline Lexicon load_lexicon(const std::optional<std::filesystem::path>& path) {
  if (!path || path->empty()) return Lexicon::builtin();
  std::ifstream in(*path);
  if (!in) throw FormatError("cannot open lexicon file '" + path->string() + "'");
  return Lexicon::parse(in, path->string());
}

inline std::string normalize_noun(const Lexicon& lex, std::string_view word) {
  return lex.normalize(word);
}

inline std::string pluralize(const Lexicon& lex, std::string_view noun, int count) {
  return lex.pluralize(noun, count);
}

}  // namespace cost
