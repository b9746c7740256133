#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "absa/types.hpp"

using namespace absa;

TEST_CASE("make_sentence basics") {
  auto s = make_sentence({"the", "battery", "life", "is", "good"});
  CHECK(s.size() == 5);
  for (bool b : s.word_begin()) CHECK(b);

  CHECK_THROWS_AS(make_sentence({}), std::invalid_argument);
  CHECK(make_sentence({"a"}).size() == 1);
  CHECK_THROWS_AS(make_sentence({"a", ""}), std::invalid_argument);
}

TEST_CASE("word_begin validation") {
  CHECK_THROWS_AS(Sentence({"pri", "ced"}, std::vector<bool>{false, false}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Sentence({"a", "b"}, std::vector<bool>{true}), std::invalid_argument);
  Sentence s({"pri", "ced"}, std::vector<bool>{true, false});
  CHECK_FALSE(s.word_begin()[1]);
}

TEST_CASE("span invariants") {
  CHECK_THROWS_AS(Span(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(Span(-1, 0), std::invalid_argument);
  Span single(3, 3);
  CHECK(single.start == single.end);
}

TEST_CASE("annotation opinion ordering") {
  CHECK_THROWS_AS(Annotation(Span(0, 0), {Span(3, 4), Span(1, 2)}, Polarity::POS),
                  std::invalid_argument);
  CHECK_THROWS_AS(Annotation(Span(0, 0), {Span(1, 2), Span(1, 2)}, Polarity::POS),
                  std::invalid_argument);
  Annotation a(Span(1, 2), {Span(4, 4)}, Polarity::NEG);
  auto sent = make_sentence({"a", "b", "c", "d", "e"});
  a.validate_for(sent);
  Annotation bad(Span(1, 2), {Span(9, 9)}, Polarity::NEG);
  CHECK_THROWS_AS(bad.validate_for(sent), std::out_of_range);
}

TEST_CASE("class token list") {
  auto c = ClassTokenList::standard();
  CHECK(c.size() == 4);
  CHECK(c.eos_index() == 0);
  CHECK(c.polarity_index(Polarity::POS) == 1);
  CHECK(c.polarity_index(Polarity::NEG) == 2);
  CHECK(c.polarity_index(Polarity::NEU) == 3);
  CHECK_FALSE(c.is_task_tag(1));

  auto tagged = ClassTokenList::with_tags({"<AESC>", "<OE>"});
  CHECK(tagged.size() == 6);
  CHECK(tagged.tag_index("<AESC>") == 4);
  CHECK(tagged.is_task_tag(4));
  CHECK_FALSE(tagged.is_task_tag(0));

  CHECK_THROWS_AS(ClassTokenList({"POS", "<EOS>", "NEG", "NEU"}), std::invalid_argument);
  CHECK_THROWS_AS(ClassTokenList({"<EOS>", "POS", "NEG"}), std::invalid_argument);
  CHECK_THROWS_AS(ClassTokenList({"<EOS>", "POS", "NEG", "NEU", "POS"}),
                  std::invalid_argument);
}

TEST_CASE("target sequence gold vs raw") {
  // n=5, l=4: EOS index is 5
  auto gold = TargetSequence::gold({1, 2, 6, 5}, 5, 4);
  CHECK_FALSE(gold.is_raw());
  CHECK(gold.eos_index() == 5);

  CHECK_THROWS(TargetSequence::gold({1, 2, 6}, 5, 4));        // no EOS
  CHECK_THROWS(TargetSequence::gold({5, 1, 2, 5}, 5, 4));     // EOS twice
  CHECK_THROWS(TargetSequence::gold({1, 2, 5, 6}, 5, 4));     // EOS not last
  CHECK_THROWS(TargetSequence::raw({9}, 5, 4));               // out of range
  CHECK_THROWS(TargetSequence::raw({-1}, 5, 4));

  auto raw = TargetSequence::raw({5, 5, 5}, 5, 4);
  CHECK(raw.is_raw());
}

TEST_CASE("pointer/class partition is total") {
  auto seq = TargetSequence::raw({}, 7, 5);
  for (int i = 0; i < 12; ++i) {
    CHECK(seq.is_pointer(i) != seq.is_class(i));
  }
  CHECK_FALSE(seq.is_pointer(12));
  CHECK_FALSE(seq.is_class(12));
  CHECK_FALSE(seq.is_pointer(-1));
}

TEST_CASE("polarity and subtask names round-trip") {
  for (auto p : {Polarity::POS, Polarity::NEG, Polarity::NEU})
    CHECK(polarity_from_string(to_string(p)) == p);
  for (auto t : {Subtask::AE, Subtask::OE, Subtask::ALSC, Subtask::AOE, Subtask::AESC,
                 Subtask::Pair, Subtask::Triplet})
    CHECK(subtask_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(polarity_from_string("positive"), std::invalid_argument);
  CHECK_THROWS_AS(subtask_from_string("triplet"), std::invalid_argument);
}
