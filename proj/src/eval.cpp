#include "discovery/eval.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "discovery/error.hpp"
#include "discovery/text.hpp"

namespace discovery {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::set<std::string> column_values(const Table& table, std::size_t column) {
  std::set<std::string> values;
  for (const auto& row : table.rows()) {
    if (!row[column].empty()) values.insert(row[column]);
  }
  return values;
}

}  // namespace

ConfusionStats per_class_stats(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) +
                                               " predictions for " +
                                               std::to_string(golds.size()) + " golds");
  }
  ConfusionStats stats;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto& pred = predictions[i];
    const auto& gold = golds[i];
    ++stats[gold].support;
    if (pred == gold) {
      ++stats[gold].tp;
    } else {
      ++stats[pred].fp;
      ++stats[gold].fn;
    }
  }
  return stats;
}

WeightedMetrics weighted_metrics(const ConfusionStats& stats) {
  std::size_t total = 0;
  WeightedMetrics sums;
  for (const auto& [label, c] : stats) {
    const double p = ratio(c.tp, c.tp + c.fp);
    const double r = ratio(c.tp, c.tp + c.fn);
    const auto w = static_cast<double>(c.support);
    sums.precision += w * p;
    sums.recall += w * r;
    sums.f1 += w * harmonic(p, r);
    total += c.support;
  }
  if (total == 0) throw Error(ErrorCode::EmptyStats, "no gold labels");
  const auto n = static_cast<double>(total);
  return {sums.precision / n, sums.recall / n, sums.f1 / n};
}

double jaccard(const std::set<std::string>& x, const std::set<std::string>& y) {
  std::size_t shared = 0;
  for (const auto& value : x) shared += y.count(value);
  const std::size_t united = x.size() + y.size() - shared;
  return ratio(shared, united);
}

JoinPrediction levenshtein_join(const Table& left, const Table& right) {
  if (!left.headers() || !right.headers()) {
    throw Error(ErrorCode::MissingHeaders, "the Levenshtein baseline needs headers on both tables");
  }
  const auto& lh = *left.headers();
  const auto& rh = *right.headers();
  std::tuple<std::size_t, std::string, std::string> best{std::numeric_limits<std::size_t>::max(),
                                                         "", ""};
  for (const auto& l : lh) {
    const auto ll = to_lower_ascii(l);
    for (const auto& r : rh) {
      std::tuple<std::size_t, std::string, std::string> candidate{
          edit_distance(ll, to_lower_ascii(r)), l, r};
      if (candidate < best) best = std::move(candidate);
    }
  }
  return {{std::get<1>(best)}, {std::get<2>(best)}};
}

JoinPrediction jaccard_join(const Table& left, const Table& right) {
  for (const auto* table : {&left, &right}) {
    if (table->rows().empty()) {
      throw Error(ErrorCode::EmptyTable, "table '" + table->name() + "' has no rows");
    }
  }
  std::vector<std::set<std::string>> right_values;
  for (std::size_t j = 0; j < right.arity(); ++j) right_values.push_back(column_values(right, j));

  double best_score = -1.0;
  std::string best_left;
  std::string best_right;
  for (std::size_t i = 0; i < left.arity(); ++i) {
    const auto values = column_values(left, i);
    const auto l = left.column_name(i);
    for (std::size_t j = 0; j < right.arity(); ++j) {
      const double score = jaccard(values, right_values[j]);
      const auto r = right.column_name(j);
      const bool better = score > best_score ||
                          (score == best_score && std::tie(l, r) < std::tie(best_left, best_right));
      if (better) {
        best_score = score;
        best_left = l;
        best_right = r;
      }
    }
  }
  return {{best_left}, {best_right}};
}

PairCounts join_match(const JoinPrediction& prediction, const std::set<ColumnPair>& gold) {
  std::set<ColumnPair> predicted;
  const auto n = std::min(prediction.left_cols.size(), prediction.right_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    predicted.emplace(prediction.left_cols[i], prediction.right_cols[i]);
  }
  PairCounts counts;
  counts.predicted = predicted.size();
  counts.gold = gold.size();
  for (const auto& pair : predicted) counts.correct += gold.count(pair);
  return counts;
}

WeightedMetrics pair_metrics(const PairCounts& counts) {
  const double p = ratio(counts.correct, counts.predicted);
  const double r = ratio(counts.correct, counts.gold);
  return {p, r, harmonic(p, r)};
}

}  // namespace discovery
