#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "absa/codec.hpp"
#include "reference_decoders.hpp"
#include "test_support.hpp"

using namespace absa;
using codec::Codec;
using codec::DecodeCounts;

namespace {

// "The drinks are always well made and wine selection is fairly priced"
Sentence drinks_sentence() {
  return make_sentence({"The", "drinks", "are", "always", "well", "made", "and", "wine",
                        "selection", "is", "fairly", "priced"});
}

std::vector<Annotation> drinks_annotations() {
  return {Annotation(Span(1, 1), {Span(4, 5)}, Polarity::POS),
          Annotation(Span(7, 8), {Span(10, 11)}, Polarity::POS)};
}

refdec::RefClasses ref_classes(const ClassTokenList& cls) {
  refdec::RefClasses rc;
  rc.l = cls.size();
  rc.pos = cls.polarity_index(Polarity::POS);
  rc.neg = cls.polarity_index(Polarity::NEG);
  rc.neu = cls.polarity_index(Polarity::NEU);
  for (int i = 0; i < cls.size(); ++i)
    if (cls.is_task_tag(i)) rc.tags.insert(i);
  return rc;
}

}  // namespace

TEST_CASE("encode worked examples") {
  Codec codec;
  auto sent = drinks_sentence();
  auto anns = drinks_annotations();
  const int n = sent.size();  // 12
  REQUIRE(n == 12);
  const int EOS = n, POS = n + 1;

  SUBCASE("AESC: 1 1 POS 7 8 POS") {
    auto seq = codec.encode(Subtask::AESC, sent, anns);
    CHECK(seq.indexes() == std::vector<int>{1, 1, POS, 7, 8, POS, EOS});
  }
  SUBCASE("OE: 4 5 10 11") {
    auto seq = codec.encode(Subtask::OE, sent, anns);
    CHECK(seq.indexes() == std::vector<int>{4, 5, 10, 11, EOS});
  }
  SUBCASE("AOE given (1,1): 1 1 4 5") {
    auto seq = codec.encode(Subtask::AOE, sent, anns, Span(1, 1));
    CHECK(seq.indexes() == std::vector<int>{1, 1, 4, 5, EOS});
  }
  SUBCASE("AOE given (7,8): 7 8 10 11") {
    auto seq = codec.encode(Subtask::AOE, sent, anns, Span(7, 8));
    CHECK(seq.indexes() == std::vector<int>{7, 8, 10, 11, EOS});
  }
  SUBCASE("Triplet: 1 1 4 5 POS 7 8 10 11 POS") {
    auto seq = codec.encode(Subtask::Triplet, sent, anns);
    CHECK(seq.indexes() == std::vector<int>{1, 1, 4, 5, POS, 7, 8, 10, 11, POS, EOS});
  }
  SUBCASE("ALSC given (7,8)") {
    auto seq = codec.encode(Subtask::ALSC, sent, anns, Span(7, 8));
    CHECK(seq.indexes() == std::vector<int>{7, 8, POS, EOS});
  }
  SUBCASE("Pair") {
    auto seq = codec.encode(Subtask::Pair, sent, anns);
    CHECK(seq.indexes() == std::vector<int>{1, 1, 4, 5, 7, 8, 10, 11, EOS});
  }
  SUBCASE("AE with no aspects is just EOS") {
    auto seq = codec.encode(Subtask::AE, sent, {});
    CHECK(seq.indexes() == std::vector<int>{EOS});
  }
  SUBCASE("given_aspect precondition") {
    CHECK_THROWS_AS(codec.encode(Subtask::AE, sent, anns, Span(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(codec.encode(Subtask::ALSC, sent, anns), std::invalid_argument);
    CHECK_THROWS_AS(codec.encode(Subtask::ALSC, sent, anns, Span(2, 2)), std::invalid_argument);
  }
  SUBCASE("out-of-range annotation rejected") {
    std::vector<Annotation> bad = {Annotation(Span(11, 13), {}, Polarity::POS)};
    CHECK_THROWS_AS(codec.encode(Subtask::AE, sent, bad), std::out_of_range);
  }
  SUBCASE("unsorted annotations rejected") {
    std::vector<Annotation> unsorted = {anns[1], anns[0]};
    CHECK_THROWS_AS(codec.encode(Subtask::AESC, sent, unsorted), std::invalid_argument);
  }
}

TEST_CASE("multitask tag is prepended") {
  Codec codec(ClassTokenList::with_tags({"<AESC>", "<OE>"}), /*multitask=*/true);
  auto sent = drinks_sentence();
  auto anns = drinks_annotations();
  const int n = sent.size();

  auto aesc = codec.encode(Subtask::AESC, sent, anns);
  CHECK(aesc.indexes() == std::vector<int>{n + 4, 1, 1, n + 1, 7, 8, n + 1, n});
  auto oe = codec.encode(Subtask::OE, sent, anns);
  CHECK(oe.indexes() == std::vector<int>{n + 5, 4, 5, 10, 11, n});

  // tag missing from the class list
  Codec no_tag(ClassTokenList::with_tags({"<AESC>"}), true);
  CHECK_THROWS_AS(no_tag.encode(Subtask::OE, sent, anns), std::invalid_argument);
}

TEST_CASE("decode_triplet worked example and malformed chunks") {
  Codec codec;
  const int n = 12, l = 4;

  auto seq = TargetSequence::raw({1, 1, 4, 5, 13, 7, 8, 10, 11, 13}, n, l);
  DecodeCounts c;
  auto got = codec.decode_triplet(seq, &c);
  std::set<codec::TripletTuple> want = {
      {Span(1, 1), Span(4, 5), Polarity::POS},
      {Span(7, 8), Span(10, 11), Polarity::POS},
  };
  CHECK(got == want);
  CHECK(c.total_chunks == 2);
  CHECK(c.invalid_size == 0);

  SUBCASE("3-length chunk dropped and counted") {
    DecodeCounts c2;
    auto empty = codec.decode_triplet(TargetSequence::raw({1, 1, 4, 13}, n, l), &c2);
    CHECK(empty.empty());
    CHECK(c2.total_chunks == 1);
    CHECK(c2.invalid_size == 1);
  }
  SUBCASE("unordered pair dropped") {
    DecodeCounts c2;
    auto empty = codec.decode_triplet(TargetSequence::raw({1, 1, 5, 4, 13}, n, l), &c2);
    CHECK(empty.empty());
    CHECK(c2.invalid_order == 1);
    CHECK(c2.valid_length == 1);
  }
  SUBCASE("mid-sequence EOS terminates an invalid-class chunk") {
    DecodeCounts c2;
    auto got2 = codec.decode_triplet(
        TargetSequence::raw({1, 1, 4, 5, 12, 7, 8, 10, 11, 13, 12}, n, l), &c2);
    CHECK(got2 == std::set<codec::TripletTuple>{{Span(7, 8), Span(10, 11), Polarity::POS}});
    CHECK(c2.invalid_class == 1);
    CHECK(c2.total_chunks == 2);
  }
  SUBCASE("unterminated trailing buffer is not a chunk") {
    DecodeCounts c2;
    auto got2 = codec.decode_triplet(TargetSequence::raw({1, 1, 4, 5}, n, l), &c2);
    CHECK(got2.empty());
    CHECK(c2.total_chunks == 0);
  }
  SUBCASE("duplicate tuples collapse") {
    auto got2 = codec.decode_triplet(
        TargetSequence::raw({1, 1, 4, 5, 13, 1, 1, 4, 5, 13}, n, l));
    CHECK(got2.size() == 1);
  }
}

TEST_CASE("decode_aesc worked example") {
  Codec codec;
  const int n = 12, l = 4;
  auto got = codec.decode_aesc(TargetSequence::raw({1, 1, 13, 7, 8, 13}, n, l));
  std::set<codec::AspectSentiment> want = {{Span(1, 1), Polarity::POS},
                                           {Span(7, 8), Polarity::POS}};
  CHECK(got == want);
  CHECK(codec.decode_aesc(TargetSequence::raw({}, n, l)).empty());
}

TEST_CASE("decode_fixed_len worked examples") {
  Codec codec;
  const int n = 12, l = 4;

  auto oe = codec.decode_oe(TargetSequence::raw({4, 5, 10, 11}, n, l));
  CHECK(oe == std::set<Span>{Span(4, 5), Span(10, 11)});

  auto pairs = codec.decode_pair(TargetSequence::raw({1, 1, 4, 5, 7, 8, 10, 11}, n, l));
  std::set<codec::SpanPair> want = {{Span(1, 1), Span(4, 5)}, {Span(7, 8), Span(10, 11)}};
  CHECK(pairs == want);

  DecodeCounts c;
  auto unordered = codec.decode_ae(TargetSequence::raw({5, 4}, n, l), &c);
  CHECK(unordered.empty());
  CHECK(c.invalid_order == 1);

  SUBCASE("incomplete trailing chunk counted") {
    DecodeCounts c2;
    auto got = codec.decode_ae(TargetSequence::raw({4, 5, 10}, n, l), &c2);
    CHECK(got == std::set<Span>{Span(4, 5)});
    CHECK(c2.total_chunks == 2);
    CHECK(c2.invalid_size == 1);
  }
  SUBCASE("class index breaks a run of pointers") {
    DecodeCounts c2;
    auto got = codec.decode_ae(TargetSequence::raw({4, 13, 5, 10, 11}, n, l), &c2);
    // buffer [4] discarded at the class index; then [5,10] and trailing [11]
    CHECK(got == std::set<Span>{Span(5, 10)});
    CHECK(c2.invalid_size == 2);
    CHECK(c2.total_chunks == 3);
  }
  SUBCASE("chunk_len validation") {
    CHECK_THROWS_AS(codec.decode_fixed_len(TargetSequence::raw({}, n, l), 3),
                    std::invalid_argument);
  }
}

TEST_CASE("decode_aoe worked examples") {
  Codec codec;
  const int n = 12, l = 4;
  CHECK(codec.decode_aoe(TargetSequence::raw({1, 1, 4, 5}, n, l), Span(1, 1)) ==
        std::set<Span>{Span(4, 5)});
  CHECK(codec.decode_aoe(TargetSequence::raw({7, 8, 10, 11, 12}, n, l), Span(7, 8)) ==
        std::set<Span>{Span(10, 11)});
  CHECK(codec.decode_aoe(TargetSequence::raw({1, 1}, n, l), Span(1, 1)).empty());
  CHECK_THROWS_AS(codec.decode_aoe(TargetSequence::raw({2, 2, 4, 5}, n, l), Span(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("decode_alsc restricted to one chunk") {
  Codec codec;
  const int n = 12, l = 4;
  auto got = codec.decode_alsc(TargetSequence::raw({7, 8, 14, 12}, n, l), Span(7, 8));
  CHECK(got == Polarity::NEG);

  DecodeCounts c;
  auto first = codec.decode_alsc(TargetSequence::raw({1, 1, 13, 2, 2, 14}, n, l), Span(1, 1), &c);
  CHECK(first == Polarity::POS);
  CHECK(c.invalid_extra == 1);

  CHECK_FALSE(codec.decode_alsc(TargetSequence::raw({1, 1}, n, l), Span(1, 1)).has_value());
  CHECK_THROWS_AS(codec.decode_alsc(TargetSequence::raw({3, 3, 13}, n, l), Span(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("index2token conversion") {
  auto sent = make_sentence({"the", "battery", "life", "is", "good"});
  auto classes = ClassTokenList::standard();
  CHECK(codec::index2token(1, sent, classes) == "battery");
  CHECK(codec::index2token(5, sent, classes) == "<EOS>");
  CHECK(codec::index2token(6, sent, classes) == "POS");
  CHECK(codec::index2token(8, sent, classes) == "NEU");
  CHECK_THROWS_AS(codec::index2token(9, sent, classes), std::out_of_range);
  CHECK_THROWS_AS(codec::index2token(-1, sent, classes), std::out_of_range);
}

TEST_CASE("round trip: decode(encode(x)) == x for every subtask") {
  Codec codec;
  std::mt19937_64 rng(2024);
  const int cases = 1500;

  for (int it = 0; it < cases; ++it) {
    const int n = 4 + static_cast<int>(rng() % 12);
    auto sent = testsup::synthetic_sentence(n);
    auto anns = testsup::random_annotations(rng, n);

    // AE
    {
      std::set<Span> want;
      for (const auto& a : anns) want.insert(a.aspect);
      auto got = codec.decode_ae(codec.encode(Subtask::AE, sent, anns));
      REQUIRE(got == want);
    }
    // OE
    {
      std::set<Span> want;
      for (const auto& a : anns) want.insert(a.opinions.begin(), a.opinions.end());
      auto got = codec.decode_oe(codec.encode(Subtask::OE, sent, anns));
      REQUIRE(got == want);
    }
    // AESC
    {
      std::set<codec::AspectSentiment> want;
      for (const auto& a : anns) want.insert({a.aspect, a.polarity});
      auto got = codec.decode_aesc(codec.encode(Subtask::AESC, sent, anns));
      REQUIRE(got == want);
    }
    // Pair
    {
      std::set<codec::SpanPair> want;
      for (const auto& a : anns)
        for (const auto& o : a.opinions) want.insert({a.aspect, o});
      auto got = codec.decode_pair(codec.encode(Subtask::Pair, sent, anns));
      REQUIRE(got == want);
    }
    // Triplet
    {
      std::set<codec::TripletTuple> want;
      for (const auto& a : anns)
        for (const auto& o : a.opinions) want.insert({a.aspect, o, a.polarity});
      auto got = codec.decode_triplet(codec.encode(Subtask::Triplet, sent, anns));
      REQUIRE(got == want);
    }
    // ALSC + AOE, threaded through each given aspect
    for (const auto& a : anns) {
      auto alsc = codec.decode_alsc(codec.encode(Subtask::ALSC, sent, anns, a.aspect), a.aspect);
      REQUIRE(alsc == a.polarity);
      std::set<Span> want(a.opinions.begin(), a.opinions.end());
      auto aoe = codec.decode_aoe(codec.encode(Subtask::AOE, sent, anns, a.aspect), a.aspect);
      REQUIRE(aoe == want);
    }
  }
}

TEST_CASE("fuzz: decoders agree with straight-line references") {
  std::mt19937_64 rng(777);
  const int cases = 3000;

  for (bool tagged : {false, true}) {
    Codec codec(tagged ? ClassTokenList::with_tags({"<AESC>", "<OE>"})
                       : ClassTokenList::standard(),
                tagged);
    auto rc = ref_classes(codec.classes());
    const int l = codec.classes().size();

    for (int it = 0; it < cases; ++it) {
      const int n = 3 + static_cast<int>(rng() % 10);
      auto raw = testsup::random_raw_indexes(rng, n, l);
      auto seq = TargetSequence::raw(raw, n, l);

      {
        refdec::RefCounts rcnt;
        DecodeCounts c;
        auto want = refdec::ref_decode_triplet(raw, n, rc, rcnt);
        auto got = codec.decode_triplet(seq, &c);
        REQUIRE(got == want);
        REQUIRE(c.total_chunks == rcnt.total);
        REQUIRE(c.invalid_size == rcnt.size_bad);
        REQUIRE(c.invalid_order == rcnt.order_bad);
        REQUIRE(c.invalid_class == rcnt.class_bad);
      }
      {
        refdec::RefCounts rcnt;
        DecodeCounts c;
        auto want = refdec::ref_decode_aesc(raw, n, rc, rcnt);
        auto got = codec.decode_aesc(seq, &c);
        REQUIRE(got == want);
        REQUIRE(c.invalid_size == rcnt.size_bad);
      }
      for (int lt : {2, 4}) {
        refdec::RefCounts rcnt;
        DecodeCounts c;
        auto want = refdec::ref_decode_fixed_len(raw, n, lt, rc, rcnt);
        auto got = codec.decode_fixed_len(seq, lt, &c);
        REQUIRE(got == want);
        REQUIRE(c.total_chunks == rcnt.total);
        REQUIRE(c.invalid_size == rcnt.size_bad);
        REQUIRE(c.invalid_order == rcnt.order_bad);
      }
      {
        // force a matching prefix so the AOE contract holds
        Span given = testsup::random_span(rng, n);
        std::vector<int> with_prefix = {given.start, given.end};
        with_prefix.insert(with_prefix.end(), raw.begin(), raw.end());
        refdec::RefCounts rcnt;
        DecodeCounts c;
        auto want = refdec::ref_decode_aoe(with_prefix, n, given, rc, rcnt);
        REQUIRE(want.has_value());
        auto got = codec.decode_aoe(TargetSequence::raw(with_prefix, n, l), given, &c);
        REQUIRE(got == *want);
        REQUIRE(c.total_chunks == rcnt.total);
      }
      {
        Span given = testsup::random_span(rng, n);
        std::vector<int> with_prefix = {given.start, given.end};
        with_prefix.insert(with_prefix.end(), raw.begin(), raw.end());
        refdec::RefCounts rcnt;
        DecodeCounts c;
        auto want = refdec::ref_decode_alsc(with_prefix, n, given, rc, rcnt);
        auto got = codec.decode_alsc(TargetSequence::raw(with_prefix, n, l), given, &c);
        REQUIRE(got == want);
        REQUIRE(c.invalid_extra == rcnt.extra);
      }
    }
  }
}

TEST_CASE("decode is deterministic") {
  Codec codec;
  std::mt19937_64 rng(5);
  for (int it = 0; it < 50; ++it) {
    const int n = 5 + static_cast<int>(rng() % 8);
    auto seq = TargetSequence::raw(testsup::random_raw_indexes(rng, n, 4), n, 4);
    CHECK(codec.decode_triplet(seq) == codec.decode_triplet(seq));
    CHECK(codec.decode_fixed_len(seq, 2) == codec.decode_fixed_len(seq, 2));
  }
}

TEST_CASE("validity_report fixtures") {
  Codec codec;
  auto sent = drinks_sentence();
  const int n = sent.size(), l = 4;
  const int POS = n + 1;

  SUBCASE("all-valid batch has zero rates") {
    std::vector<TargetSequence> seqs;
    std::vector<Sentence> sents;
    for (int i = 0; i < 5; ++i) {
      seqs.push_back(TargetSequence::raw({1, 1, 4, 5, POS, 7, 8, 10, 11, POS, n}, n, l));
      sents.push_back(sent);
    }
    auto rep = codec.validity_report(seqs, Subtask::Triplet, sents);
    CHECK(rep.total_chunks == 10);
    CHECK(rep.invalid_size_rate == 0.0);
    CHECK(rep.invalid_order_rate == 0.0);
    CHECK(rep.invalid_token_rate == 0.0);
  }

  SUBCASE("one short chunk out of ten") {
    std::vector<TargetSequence> seqs;
    std::vector<Sentence> sents;
    for (int i = 0; i < 4; ++i) {
      seqs.push_back(TargetSequence::raw({1, 1, 4, 5, POS, 7, 8, 10, 11, POS}, n, l));
      sents.push_back(sent);
    }
    seqs.push_back(TargetSequence::raw({1, 1, 4, POS, 7, 8, 10, 11, POS}, n, l));
    sents.push_back(sent);
    auto rep = codec.validity_report(seqs, Subtask::Triplet, sents);
    CHECK(rep.total_chunks == 10);
    CHECK(rep.invalid_size_count == 1);
    CHECK(rep.invalid_size_rate == doctest::Approx(0.1));
    CHECK(rep.valid_length_count == 9);
  }

  SUBCASE("invalid order denominator is valid-length chunks") {
    std::vector<TargetSequence> seqs = {
        TargetSequence::raw({1, 1, 5, 4, POS}, n, l),       // unordered
        TargetSequence::raw({1, 1, 4, 5, POS}, n, l),       // valid
        TargetSequence::raw({1, 1, 4, POS}, n, l),          // short
        TargetSequence::raw({1, 1, 4, 5, POS}, n, l),       // valid
    };
    std::vector<Sentence> sents(4, sent);
    auto rep = codec.validity_report(seqs, Subtask::Triplet, sents);
    CHECK(rep.total_chunks == 4);
    CHECK(rep.valid_length_count == 3);
    CHECK(rep.invalid_order_count == 1);
    CHECK(rep.invalid_order_rate == doctest::Approx(1.0 / 3.0));
    CHECK(rep.invalid_size_rate == doctest::Approx(0.25));
  }

  SUBCASE("invalid token needs a subword start") {
    // "fairly priced" split as fair ly priced: 'ly' is a continuation piece
    Sentence sub({"the", "wine", "is", "fair", "ly", "priced"},
                 std::vector<bool>{true, true, true, true, false, true});
    std::vector<TargetSequence> seqs = {
        TargetSequence::raw({4, 5, 6 + 1}, 6, l),  // a^s at 'ly': inside a word
        TargetSequence::raw({3, 5, 6 + 1}, 6, l),
    };
    std::vector<Sentence> sents = {sub, sub};
    auto rep = codec.validity_report(seqs, Subtask::AESC, sents);
    CHECK(rep.total_chunks == 2);
    CHECK(rep.invalid_token_count == 1);
    CHECK(rep.invalid_token_rate == doctest::Approx(0.5));
  }

  SUBCASE("whitespace mode invalid token rate is identically zero") {
    std::mt19937_64 rng(99);
    std::vector<TargetSequence> seqs;
    std::vector<Sentence> sents;
    for (int i = 0; i < 100; ++i) {
      int nn = 4 + static_cast<int>(rng() % 8);
      seqs.push_back(TargetSequence::raw(testsup::random_raw_indexes(rng, nn, l), nn, l));
      sents.push_back(testsup::synthetic_sentence(nn));
    }
    auto rep = codec.validity_report(seqs, Subtask::Triplet, sents);
    CHECK(rep.invalid_token_count == 0);
  }

  SUBCASE("length mismatch raises") {
    std::vector<TargetSequence> seqs = {TargetSequence::raw({1, 1}, n, l)};
    CHECK_THROWS_AS(codec.validity_report(seqs, Subtask::AE, {}), std::invalid_argument);
    std::vector<Sentence> wrong = {testsup::synthetic_sentence(3)};
    CHECK_THROWS_AS(codec.validity_report(seqs, Subtask::AE, wrong), std::invalid_argument);
  }
}

TEST_CASE("validity_report vs hand-counted fuzz oracle") {
  Codec codec;
  std::mt19937_64 rng(4242);
  auto rc = ref_classes(codec.classes());
  for (int it = 0; it < 200; ++it) {
    std::vector<TargetSequence> seqs;
    std::vector<Sentence> sents;
    refdec::RefCounts want;
    const int batch = 1 + static_cast<int>(rng() % 6);
    for (int b = 0; b < batch; ++b) {
      const int n = 4 + static_cast<int>(rng() % 8);
      auto raw = testsup::random_raw_indexes(rng, n, 4);
      refdec::RefCounts one;
      refdec::ref_decode_triplet(raw, n, rc, one);
      want.total += one.total;
      want.size_bad += one.size_bad;
      want.order_bad += one.order_bad;
      seqs.push_back(TargetSequence::raw(raw, n, 4));
      sents.push_back(testsup::synthetic_sentence(n));
    }
    auto rep = codec.validity_report(seqs, Subtask::Triplet, sents);
    REQUIRE(rep.total_chunks == want.total);
    REQUIRE(rep.invalid_size_count == want.size_bad);
    REQUIRE(rep.invalid_order_count == want.order_bad);
  }
}
