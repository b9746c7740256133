#pragma once

#include <set>
#include <string>
#include <vector>

#include "absa/codec.hpp"
#include "absa/types.hpp"

namespace absa::eval {

// Exact-match tuples flattened to integers: spans contribute (start, end),
// polarities one code. All tuples in a comparison must share an arity.
using Tuple = std::vector<int>;

Tuple tuple_of(const Span& s);
Tuple tuple_of(const codec::AspectSentiment& t);
Tuple tuple_of(const codec::SpanPair& t);
Tuple tuple_of(const codec::TripletTuple& t);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t matched = 0;
  bool zero_support = false;  // no gold and no predictions
};

// Micro-averaged exact matching over aligned per-sentence tuple sets.
Scores score_spans(const std::vector<std::set<Tuple>>& gold,
                   const std::vector<std::set<Tuple>>& pred);

// Single pooled pair of sets.
Scores score_sets(const std::set<Tuple>& gold, const std::set<Tuple>& pred);

struct ConditionedScores {
  double alsc_accuracy = 0.0;
  std::size_t alsc_support = 0;  // aspects whose span was a true-positive AE hit
  bool alsc_zero_support = false;
  Scores aesc;  // AESC restricted to the TP-AE aspects on both sides
};

// ALSC accuracy and AESC F1 computed only over aspects whose span was itself
// a true-positive AE prediction.
ConditionedScores score_conditioned(
    const std::vector<std::vector<codec::AspectSentiment>>& gold_aspects,
    const std::vector<std::set<Span>>& pred_ae,
    const std::vector<std::set<codec::AspectSentiment>>& pred_aesc);

struct ReportRow {
  std::string name;
  Scores scores;
};

std::string report_to_json(const std::vector<ReportRow>& rows);
std::string report_to_table(const std::vector<ReportRow>& rows);

}  // namespace absa::eval
