#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "discovery/backend.hpp"
#include "discovery/eval.hpp"
#include "discovery/harness.hpp"
#include "discovery/ontology.hpp"

namespace discovery {

enum class TaskKind { TableClass, ColumnType, Join };

const char* to_string(TaskKind task);

enum class SystemKind { Chorus, Jaccard, Levenshtein };

const char* to_string(SystemKind system);

struct ManifestItem {
  std::string id;
  TaskKind task = TaskKind::TableClass;
  std::filesystem::path table;  // table-class and column-type
  std::filesystem::path left;   // join
  std::filesystem::path right;  // join
  bool headers = true;
  std::vector<std::string> gold_labels;  // one class, or one label per column
  std::vector<ColumnPair> gold_pairs;    // join
};

/// JSON-lines manifest, one object per line:
///   {"id", "task": "table-class"|"column-type"|"join", "table" | "left"+"right",
///    "headers": bool, "gold": label | [labels] | [[l, r], ...]}
/// Relative paths resolve against `base_dir`. Blank lines are skipped.
/// Throws ManifestError with the line number.
std::vector<ManifestItem> parse_manifest(std::string_view source,
                                         const std::filesystem::path& base_dir);
std::vector<ManifestItem> load_manifest(const std::filesystem::path& path);

struct ItemRecord {
  std::string id;
  TaskKind task = TaskKind::TableClass;
  // Classification tasks: one entry per instance (one per table-class item,
  // one per column for column-type). Failed instances predict kNoPrediction.
  std::vector<std::string> predicted_labels;
  std::vector<std::string> gold_labels;
  // Join items.
  std::vector<ColumnPair> predicted_pairs;
  std::vector<ColumnPair> gold_pairs;
  PairCounts pairs;
  bool correct = false;  // every instance of the item is right
  bool anchored = false;
  std::size_t attempts = 0;
  std::optional<std::string> failure;
};

inline constexpr const char* kNoPrediction = "(none)";

struct TaskReport {
  TaskKind task = TaskKind::TableClass;
  std::size_t items = 0;
  std::size_t instances = 0;  // gold labels, or gold pairs for joins
  WeightedMetrics metrics;
};

struct Report {
  SystemKind system = SystemKind::Chorus;
  double temperature = 0.0;
  WeightedMetrics metrics;  // instance-weighted mean of the per-task metrics
  std::vector<TaskReport> per_task;
  std::size_t items = 0;
  double throughput = 0.0;  // items per second
  Money total_cost;
  bool cost_estimated = false;
  std::vector<ItemRecord> per_item;
};

/// Per-task and overall metrics from item records: weighted multiclass
/// metrics for classification tasks, pair precision/recall for joins.
void aggregate(Report& report);

struct BenchmarkConfig {
  PipelineConfig pipeline;
  // Upper bound on items evaluated at once. Ignored for ordered-replay
  // backends, which always run in manifest order.
  std::size_t jobs = 4;
};

/// Runs every item. The backend and ontology are required for Chorus; the
/// baselines accept only join items (UnsupportedTask otherwise). A TaskFailed
/// item is recorded as incorrect; other errors propagate.
Report run_benchmark(const std::vector<ManifestItem>& manifest, SystemKind system,
                     ChatBackend* backend, const Ontology* ontology,
                     const BenchmarkConfig& config);

/// The report as one JSON document with stable key order.
std::string report_to_json(const Report& report);

}  // namespace discovery
