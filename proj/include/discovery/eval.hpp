#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "discovery/harness.hpp"
#include "discovery/table.hpp"

namespace discovery {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // gold occurrences of the class

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

using ConfusionStats = std::map<std::string, ClassCounts>;

struct WeightedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class counts over paired predictions and golds. Throws LengthMismatch.
ConfusionStats per_class_stats(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& golds);

/// Support-weighted mean of per-class precision, recall and F1; a per-class
/// value with a zero denominator counts as 0. Throws EmptyStats when the
/// total support is 0.
WeightedMetrics weighted_metrics(const ConfusionStats& stats);

/// |X ∩ Y| / |X ∪ Y|, defined as 0 when both sets are empty.
double jaccard(const std::set<std::string>& x, const std::set<std::string>& y);

/// Header pair with the smallest edit distance between lowercased names;
/// ties go to the lexicographically smallest (left, right). Throws
/// MissingHeaders.
JoinPrediction levenshtein_join(const Table& left, const Table& right);

/// Column pair whose distinct non-empty value sets have the highest Jaccard
/// similarity; ties go to the smallest (left name, right name). Headerless
/// columns are named by position. Throws EmptyTable.
JoinPrediction jaccard_join(const Table& left, const Table& right);

using ColumnPair = std::pair<std::string, std::string>;

struct PairCounts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  PairCounts& operator+=(const PairCounts& other) {
    correct += other.correct;
    predicted += other.predicted;
    gold += other.gold;
    return *this;
  }
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

/// Counts distinct predicted (left, right) pairs found in `gold`, compared
/// case-sensitively.
PairCounts join_match(const JoinPrediction& prediction, const std::set<ColumnPair>& gold);

/// Precision over predicted pairs, recall over gold pairs.
WeightedMetrics pair_metrics(const PairCounts& counts);

}  // namespace discovery
