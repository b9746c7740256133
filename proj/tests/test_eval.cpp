#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "absa/eval.hpp"
#include "test_support.hpp"

using namespace absa;
using eval::Scores;
using eval::Tuple;

namespace {

std::set<Tuple> aesc_set(std::initializer_list<codec::AspectSentiment> xs) {
  std::set<Tuple> out;
  for (const auto& x : xs) out.insert(eval::tuple_of(x));
  return out;
}

}  // namespace

TEST_CASE("perfect match and polarity mismatch") {
  auto gold = aesc_set({{Span(1, 1), Polarity::POS}});
  auto same = aesc_set({{Span(1, 1), Polarity::POS}});
  auto s = eval::score_sets(gold, same);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);

  auto wrong = aesc_set({{Span(1, 1), Polarity::NEG}});
  auto s2 = eval::score_sets(gold, wrong);
  CHECK(s2.f1 == 0.0);
  CHECK(s2.matched == 0);
}

TEST_CASE("the 2/3 and 1/2 confusion gives F1 = 4/7") {
  std::set<Tuple> gold, pred;
  for (int i = 0; i < 4; ++i)
    gold.insert(eval::tuple_of(codec::TripletTuple{Span(i, i), Span(i + 5, i + 5),
                                                   Polarity::POS}));
  // three predictions, two of them correct
  pred.insert(eval::tuple_of(codec::TripletTuple{Span(0, 0), Span(5, 5), Polarity::POS}));
  pred.insert(eval::tuple_of(codec::TripletTuple{Span(1, 1), Span(6, 6), Polarity::POS}));
  pred.insert(eval::tuple_of(codec::TripletTuple{Span(9, 9), Span(9, 9), Polarity::NEG}));

  auto s = eval::score_sets(gold, pred);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("micro average pools per-sentence counts") {
  std::vector<std::set<Tuple>> gold = {
      aesc_set({{Span(0, 0), Polarity::POS}, {Span(2, 2), Polarity::NEG}}),
      aesc_set({{Span(1, 1), Polarity::NEU}}),
  };
  std::vector<std::set<Tuple>> pred = {
      aesc_set({{Span(0, 0), Polarity::POS}}),
      aesc_set({{Span(1, 1), Polarity::NEU}, {Span(3, 3), Polarity::POS}}),
  };
  auto s = eval::score_spans(gold, pred);
  CHECK(s.gold == 3);
  CHECK(s.predicted == 3);
  CHECK(s.matched == 2);

  // a tuple on the wrong sentence does not match
  std::vector<std::set<Tuple>> crossed = {
      aesc_set({{Span(1, 1), Polarity::NEU}}),
      aesc_set({{Span(0, 0), Polarity::POS}}),
  };
  CHECK(eval::score_spans(gold, crossed).matched == 0);
}

TEST_CASE("errors and degenerate cases") {
  CHECK_THROWS_AS(eval::score_spans({{}}, {}), std::invalid_argument);

  std::set<Tuple> spans = {eval::tuple_of(Span(0, 1))};
  std::set<Tuple> triples = {eval::tuple_of(codec::TripletTuple{Span(0, 1), Span(2, 2),
                                                                Polarity::POS})};
  CHECK_THROWS_AS(eval::score_sets(spans, triples), std::invalid_argument);

  auto empty = eval::score_sets({}, {});
  CHECK(empty.zero_support);
  CHECK(empty.f1 == 0.0);

  auto no_pred = eval::score_sets(spans, {});
  CHECK_FALSE(no_pred.zero_support);
  CHECK(no_pred.precision == 0.0);
  CHECK(no_pred.recall == 0.0);
}

TEST_CASE("symmetry, idempotence and bounds over random sets") {
  std::mt19937_64 rng(12);
  for (int it = 0; it < 300; ++it) {
    std::vector<std::set<Tuple>> gold(3), pred(3);
    for (int i = 0; i < 3; ++i) {
      const int ng = static_cast<int>(rng() % 5), np = static_cast<int>(rng() % 5);
      for (int k = 0; k < ng; ++k)
        gold[i].insert(eval::tuple_of(testsup::random_span(rng, 8)));
      for (int k = 0; k < np; ++k)
        pred[i].insert(eval::tuple_of(testsup::random_span(rng, 8)));
    }
    auto s = eval::score_spans(gold, pred);
    auto swapped = eval::score_spans(pred, gold);
    REQUIRE(s.precision == swapped.recall);
    REQUIRE(s.recall == swapped.precision);
    REQUIRE(s.f1 == doctest::Approx(swapped.f1));
    REQUIRE((0.0 <= s.precision && s.precision <= 1.0));
    REQUIRE((0.0 <= s.recall && s.recall <= 1.0));
    REQUIRE((0.0 <= s.f1 && s.f1 <= 1.0));
    REQUIRE(s.matched <= std::min(s.gold, s.predicted));
  }
}

TEST_CASE("conditioned metrics") {
  using codec::AspectSentiment;

  SUBCASE("all AE spans wrong: zero support") {
    std::vector<std::vector<AspectSentiment>> gold = {{{Span(1, 1), Polarity::POS}}};
    std::vector<std::set<Span>> ae = {{Span(3, 3)}};
    std::vector<std::set<AspectSentiment>> aesc = {{{Span(3, 3), Polarity::POS}}};
    auto c = eval::score_conditioned(gold, ae, aesc);
    CHECK(c.alsc_support == 0);
    CHECK(c.alsc_zero_support);
    CHECK(c.alsc_accuracy == 0.0);
  }

  SUBCASE("all spans right, half the polarities right") {
    std::vector<std::vector<AspectSentiment>> gold = {
        {{Span(1, 1), Polarity::POS}, {Span(3, 3), Polarity::NEG}}};
    std::vector<std::set<Span>> ae = {{Span(1, 1), Span(3, 3)}};
    std::vector<std::set<AspectSentiment>> aesc = {
        {{Span(1, 1), Polarity::POS}, {Span(3, 3), Polarity::NEU}}};
    auto c = eval::score_conditioned(gold, ae, aesc);
    CHECK(c.alsc_support == 2);
    CHECK(c.alsc_accuracy == 0.5);
    CHECK(c.aesc.gold == 2);
    CHECK(c.aesc.predicted == 2);
    CHECK(c.aesc.matched == 1);
  }

  SUBCASE("randomized fixture equals an independent two-pass count") {
    std::mt19937_64 rng(9);
    for (int it = 0; it < 200; ++it) {
      const int sentences = 1 + static_cast<int>(rng() % 4);
      std::vector<std::vector<AspectSentiment>> gold(sentences);
      std::vector<std::set<Span>> ae(sentences);
      std::vector<std::set<AspectSentiment>> aesc(sentences);
      for (int i = 0; i < sentences; ++i) {
        std::set<Span> aspects;
        for (int k = 0; k < 3; ++k) aspects.insert(testsup::random_span(rng, 6));
        for (const auto& a : aspects) gold[i].push_back({a, testsup::random_polarity(rng)});
        for (int k = 0; k < 2; ++k) ae[i].insert(testsup::random_span(rng, 6));
        for (int k = 0; k < 2; ++k)
          aesc[i].insert({testsup::random_span(rng, 6), testsup::random_polarity(rng)});
      }
      auto c = eval::score_conditioned(gold, ae, aesc);

      // independent straight-line pass
      std::size_t support = 0, correct = 0;
      for (int i = 0; i < sentences; ++i)
        for (const auto& [a, p] : gold[i])
          if (ae[i].count(a)) {
            ++support;
            if (aesc[i].count({a, p})) ++correct;
          }
      REQUIRE(c.alsc_support == support);
      if (support > 0) REQUIRE(c.alsc_accuracy == doctest::Approx(double(correct) / support));
    }
  }
}

TEST_CASE("report emission") {
  std::vector<eval::ReportRow> rows = {
      {"Triplet", eval::score_sets(aesc_set({{Span(1, 1), Polarity::POS}}),
                                   aesc_set({{Span(1, 1), Polarity::POS}}))},
      {"AESC", eval::score_sets({}, {})},
  };
  auto j = eval::report_to_json(rows);
  CHECK(j.find("\"subtask\": \"Triplet\"") != std::string::npos);
  CHECK(j.find("\"zero_support\": true") != std::string::npos);

  auto table = eval::report_to_table(rows);
  CHECK(table.find("Triplet") != std::string::npos);
  CHECK(table.find("(zero support)") != std::string::npos);
  CHECK(table.find("1.0000") != std::string::npos);
}
