#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cost/lexicon.hpp"
#include "synthetic.hpp"

using cost::Lexicon;

TEST(Lexicon, BuiltinPersonSynonyms) {
  const auto& lex = Lexicon::builtin();
  for (const char* w : {"man", "woman", "child", "kid", "boy", "girl"}) {
    ASSERT_TRUE(lex.synonyms().count(w)) << w;
    EXPECT_EQ(lex.synonyms().at(w), "person") << w;
  }
}

TEST(Lexicon, BuiltinMatchesShippedDataFile) {
  std::ifstream in(COST_DATA_DIR "/lexicon.txt");
  ASSERT_TRUE(in);
  const auto from_file = Lexicon::parse(in);
  EXPECT_EQ(from_file.synonyms(), Lexicon::builtin().synonyms());
  EXPECT_EQ(from_file.object_nouns(), Lexicon::builtin().object_nouns());
}

TEST(Lexicon, EmptyFileIsIdentityTables) {
  const auto lex = Lexicon::parse_text("");
  EXPECT_TRUE(lex.synonyms().empty());
  EXPECT_TRUE(lex.irregular_plurals().empty());
  EXPECT_TRUE(lex.object_nouns().empty());
  EXPECT_EQ(lex.normalize("woman"), "woman");
  EXPECT_EQ(lex.normalize("sky"), "sky");
}

TEST(Lexicon, ReusedCanonicalKeyIsValidationError) {
  EXPECT_THROW(Lexicon::parse_text("syn woman person\nsyn person human\n"), cost::ValidationError);
}

TEST(Lexicon, MalformedLineNamesLine) {
  try {
    Lexicon::parse_text("# header\nsyn woman person\nsyn broken\n", "lex.txt");
    FAIL() << "expected FormatError";
  } catch (const cost::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("lex.txt:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Lexicon::parse_text("frobnicate a b\n"), cost::FormatError);
  EXPECT_THROW(Lexicon::parse_text("plural sheep sheep\n"), cost::FormatError);
}

TEST(Lexicon, HyphenatedCanonicalRejected) {
  EXPECT_THROW(Lexicon::parse_text("noun wall-brick\n"), cost::ValidationError);
}

TEST(Lexicon, LoadLexiconFromPath) {
  const auto dir = cost::synth::scratch_dir("lexicon");
  const auto path = dir / "lex.txt";
  std::ofstream(path) << "noun widget\nsyn gizmo widget\nplural geese goose\n";
  const auto lex = cost::load_lexicon(path);
  EXPECT_EQ(lex.normalize("gizmos"), "widget");
  EXPECT_EQ(lex.normalize("geese"), "goose");
  EXPECT_THROW(cost::load_lexicon(dir / "missing.txt"), cost::FormatError);
  EXPECT_EQ(cost::load_lexicon(std::nullopt).object_nouns(), Lexicon::builtin().object_nouns());
  std::filesystem::remove_all(dir);
}

TEST(NormalizeNoun, Examples) {
  const auto& lex = Lexicon::builtin();
  EXPECT_EQ(cost::normalize_noun(lex, "women"), "person");
  EXPECT_EQ(cost::normalize_noun(lex, "cars"), "car");
  EXPECT_EQ(cost::normalize_noun(lex, "sky"), "sky");
  EXPECT_EQ(cost::normalize_noun(lex, "people"), "person");
  EXPECT_EQ(cost::normalize_noun(lex, "buses"), "bus");
  EXPECT_EQ(cost::normalize_noun(lex, "horses"), "horse");
  EXPECT_EQ(cost::normalize_noun(lex, "benches"), "bench");
  EXPECT_EQ(cost::normalize_noun(lex, "knives"), "knife");
  EXPECT_EQ(cost::normalize_noun(lex, "Dining Tables"), "dining table");
  EXPECT_EQ(cost::normalize_noun(lex, "skis"), "ski");
  EXPECT_EQ(cost::normalize_noun(lex, "grass"), "grass");
  EXPECT_EQ(cost::normalize_noun(lex, "glasses"), "glass");
  EXPECT_EQ(cost::normalize_noun(lex, "cherries"), "cherry");
}

TEST(NormalizeNoun, SuffixRulesWithoutTables) {
  const auto lex = Lexicon::parse_text("");
  EXPECT_EQ(lex.normalize("cars"), "car");
  EXPECT_EQ(lex.normalize("berries"), "berry");
  EXPECT_EQ(lex.normalize("boxes"), "box");
  EXPECT_EQ(lex.normalize("dishes"), "dish");
  EXPECT_EQ(lex.normalize("glass"), "glass");
  EXPECT_EQ(lex.normalize("status"), "status");
}

TEST(WordToCount, Examples) {
  EXPECT_EQ(cost::word_to_count("two"), 2);
  EXPECT_EQ(cost::word_to_count("fourteen"), 14);
  EXPECT_EQ(cost::word_to_count("banana"), std::nullopt);
  EXPECT_EQ(cost::word_to_count("twenty-one"), 21);
  EXPECT_EQ(cost::word_to_count("twenty one"), 21);
  EXPECT_EQ(cost::word_to_count("ninety-nine"), 99);
  EXPECT_EQ(cost::word_to_count("a"), 1);
  EXPECT_EQ(cost::word_to_count("An"), 1);
  EXPECT_EQ(cost::word_to_count("12"), 12);
  EXPECT_EQ(cost::word_to_count("0"), std::nullopt);
  EXPECT_EQ(cost::word_to_count("twenty-ten"), std::nullopt);
  EXPECT_EQ(cost::word_to_count(""), std::nullopt);
}

TEST(WordToCount, InvertsNumeralWriterOverFullRange) {
  for (int k = 1; k <= cost::kMaxNumeralWord; ++k)
    EXPECT_EQ(cost::word_to_count(cost::count_to_words(k)), k) << cost::count_to_words(k);
  EXPECT_EQ(cost::count_to_words(21), "twenty-one");
  EXPECT_EQ(cost::count_to_words(40), "forty");
  EXPECT_EQ(cost::count_to_words(150), "150");
}

TEST(Pluralize, Examples) {
  const auto& lex = Lexicon::builtin();
  EXPECT_EQ(cost::pluralize(lex, "person", 2), "people");
  EXPECT_EQ(cost::pluralize(lex, "car", 1), "car");
  EXPECT_EQ(cost::pluralize(lex, "bus", 3), "buses");
  EXPECT_EQ(cost::pluralize(lex, "bench", 2), "benches");
  EXPECT_EQ(cost::pluralize(lex, "toothbrush", 2), "toothbrushes");
  EXPECT_EQ(cost::pluralize(lex, "dining table", 4), "dining tables");
  EXPECT_EQ(cost::pluralize(lex, "knife", 2), "knives");
  EXPECT_EQ(cost::pluralize(lex, "berry", 2), "berries");
  EXPECT_EQ(cost::pluralize(lex, "toy", 2), "toys");
}

// Property: normalize is idempotent on arbitrary lowercase tokens, including
// ones built from plural-looking endings.
TEST(LexiconProperty, NormalizeIdempotent) {
  std::mt19937 rng(7);
  const std::string endings[] = {"s", "es", "ies", "ses", "sses", "xes", "us", "is", "y", ""};
  const auto& lexicons = {Lexicon::builtin(), Lexicon::parse_text("")};
  for (const auto& lex : lexicons) {
    for (int trial = 0; trial < 3000; ++trial) {
      std::string w;
      const int len = cost::synth::uniform(rng, 1, 7);
      for (int i = 0; i < len; ++i) w += static_cast<char>('a' + cost::synth::uniform(rng, 0, 25));
      w += endings[cost::synth::uniform(rng, 0, 9)];
      const auto once = lex.normalize(w);
      EXPECT_EQ(lex.normalize(once), once) << w;
    }
    for (const auto& n : lex.sorted_object_nouns()) {
      const auto once = lex.normalize(n);
      EXPECT_EQ(once, n);
    }
  }
}

// Property: every canonical noun survives pluralize -> normalize for any count.
TEST(LexiconProperty, InflectionRoundTrip) {
  const auto& lex = Lexicon::builtin();
  for (const auto& n : lex.sorted_object_nouns())
    for (int c : {1, 2, 3, 17, 60})
      EXPECT_EQ(lex.normalize(lex.pluralize(n, c)), n) << n << " x" << c;
}
