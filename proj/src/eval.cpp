#include "absa/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace absa::eval {

using nlohmann::json;

Tuple tuple_of(const Span& s) { return {s.start, s.end}; }

Tuple tuple_of(const codec::AspectSentiment& t) {
  const auto& [a, p] = t;
  return {a.start, a.end, static_cast<int>(p)};
}

Tuple tuple_of(const codec::SpanPair& t) {
  const auto& [a, o] = t;
  return {a.start, a.end, o.start, o.end};
}

Tuple tuple_of(const codec::TripletTuple& t) {
  const auto& [a, o, p] = t;
  return {a.start, a.end, o.start, o.end, static_cast<int>(p)};
}

namespace {

void check_arity(const std::set<Tuple>& tuples, std::size_t& arity) {
  for (const auto& t : tuples) {
    if (arity == 0) arity = t.size();
    if (t.size() != arity || t.empty())
      throw std::invalid_argument("score_spans: tuples of mixed arity");
  }
}

Scores finish(std::size_t gold, std::size_t pred, std::size_t matched) {
  Scores s;
  s.gold = gold;
  s.predicted = pred;
  s.matched = matched;
  s.precision = pred > 0 ? static_cast<double>(matched) / static_cast<double>(pred) : 0.0;
  s.recall = gold > 0 ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  s.zero_support = gold == 0 && pred == 0;
  return s;
}

}  // namespace

Scores score_sets(const std::set<Tuple>& gold, const std::set<Tuple>& pred) {
  return score_spans(std::vector{gold}, std::vector{pred});
}

Scores score_spans(const std::vector<std::set<Tuple>>& gold,
                   const std::vector<std::set<Tuple>>& pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("score_spans: gold/pred sentence counts differ");
  std::size_t arity = 0;
  std::size_t n_gold = 0, n_pred = 0, n_matched = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    check_arity(gold[i], arity);
    check_arity(pred[i], arity);
    n_gold += gold[i].size();
    n_pred += pred[i].size();
    for (const auto& t : pred[i]) n_matched += gold[i].count(t);
  }
  return finish(n_gold, n_pred, n_matched);
}

ConditionedScores score_conditioned(
    const std::vector<std::vector<codec::AspectSentiment>>& gold_aspects,
    const std::vector<std::set<Span>>& pred_ae,
    const std::vector<std::set<codec::AspectSentiment>>& pred_aesc) {
  if (gold_aspects.size() != pred_ae.size() || gold_aspects.size() != pred_aesc.size())
    throw std::invalid_argument("score_conditioned: sentence counts differ");

  ConditionedScores out;
  std::size_t correct = 0;
  std::size_t c_gold = 0, c_pred = 0, c_matched = 0;
  for (size_t i = 0; i < gold_aspects.size(); ++i) {
    std::set<Span> tp;  // gold aspects whose span was recovered by AE
    for (const auto& [aspect, gold_pol] : gold_aspects[i])
      if (pred_ae[i].count(aspect)) tp.insert(aspect);

    for (const auto& [aspect, gold_pol] : gold_aspects[i]) {
      if (!tp.count(aspect)) continue;
      ++out.alsc_support;
      ++c_gold;
      if (pred_aesc[i].count({aspect, gold_pol})) {
        ++correct;
        ++c_matched;
      }
    }
    for (const auto& [aspect, pol] : pred_aesc[i])
      if (tp.count(aspect)) ++c_pred;
  }
  out.alsc_zero_support = out.alsc_support == 0;
  out.alsc_accuracy = out.alsc_support > 0
                          ? static_cast<double>(correct) / static_cast<double>(out.alsc_support)
                          : 0.0;
  out.aesc = finish(c_gold, c_pred, c_matched);
  return out;
}

std::string report_to_json(const std::vector<ReportRow>& rows) {
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"subtask", r.name},
                 {"precision", r.scores.precision},
                 {"recall", r.scores.recall},
                 {"f1", r.scores.f1},
                 {"gold", r.scores.gold},
                 {"predicted", r.scores.predicted},
                 {"matched", r.scores.matched},
                 {"zero_support", r.scores.zero_support}});
  return j.dump(2);
}

std::string report_to_table(const std::vector<ReportRow>& rows) {
  std::size_t name_w = 7;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w) + 2) << "subtask" << std::right
     << std::setw(9) << "P" << std::setw(9) << "R" << std::setw(9) << "F1" << std::setw(8)
     << "gold" << std::setw(8) << "pred" << std::setw(8) << "match" << "\n";
  os << std::string(name_w + 2 + 9 * 3 + 8 * 3, '-') << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << r.name << std::right
       << std::setw(9) << r.scores.precision << std::setw(9) << r.scores.recall << std::setw(9)
       << r.scores.f1 << std::setw(8) << r.scores.gold << std::setw(8) << r.scores.predicted
       << std::setw(8) << r.scores.matched;
    if (r.scores.zero_support) os << "  (zero support)";
    os << "\n";
  }
  return os.str();
}

}  // namespace absa::eval
