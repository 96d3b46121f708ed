#include "discovery/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "discovery/error.hpp"
#include "discovery/text.hpp"

namespace discovery {

const char* to_string(TaskKind task) {
  switch (task) {
    case TaskKind::TableClass: return "table-class";
    case TaskKind::ColumnType: return "column-type";
    case TaskKind::Join: return "join";
  }
  return "table-class";
}

const char* to_string(SystemKind system) {
  switch (system) {
    case SystemKind::Chorus: return "chorus";
    case SystemKind::Jaccard: return "jaccard";
    case SystemKind::Levenshtein: return "levenshtein";
  }
  return "chorus";
}

namespace {

using nlohmann::json;

[[noreturn]] void manifest_error(const std::string& message, std::size_t line) {
  throw Error(ErrorCode::ManifestError, message, line);
}

std::string require_string(const json& object, const char* key, std::size_t line) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_string() || it->get<std::string>().empty()) {
    manifest_error(std::string("missing string field \"") + key + "\"", line);
  }
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base / p;
}

TaskKind parse_task(const std::string& name, std::size_t line) {
  if (name == "table-class") return TaskKind::TableClass;
  if (name == "column-type") return TaskKind::ColumnType;
  if (name == "join") return TaskKind::Join;
  manifest_error("unknown task \"" + name + "\"", line);
}

void parse_gold(ManifestItem& item, const json& gold, std::size_t line) {
  switch (item.task) {
    case TaskKind::TableClass:
      if (!gold.is_string()) manifest_error("table-class gold must be a string", line);
      item.gold_labels.push_back(gold.get<std::string>());
      return;
    case TaskKind::ColumnType:
      if (!gold.is_array() || gold.empty()) {
        manifest_error("column-type gold must be a nonempty list of labels", line);
      }
      for (const auto& label : gold) {
        if (!label.is_string()) manifest_error("column-type gold labels must be strings", line);
        item.gold_labels.push_back(label.get<std::string>());
      }
      return;
    case TaskKind::Join:
      if (!gold.is_array() || gold.empty()) {
        manifest_error("join gold must be a nonempty list of [left, right] pairs", line);
      }
      for (const auto& pair : gold) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          manifest_error("join gold entries must be [left, right] string pairs", line);
        }
        item.gold_pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
      return;
  }
}

// Gold labels are written by people: accept "dbo:x", full IRIs and any case,
// and use the ontology's spelling when the term exists.
std::string canonical_label(const std::string& raw, TermKind kind, const Ontology* ontology) {
  if (iequals_ascii(trim(raw), kUnknownLabel)) return kUnknownLabel;
  const Ontology fallback;
  const Ontology& ont = ontology != nullptr ? *ontology : fallback;
  std::string label;
  try {
    label = normalize_label(raw, ont);
  } catch (const Error&) {
    return raw;
  }
  if (const auto term = lookup(ont, kind, label)) return term->local_name;
  return label;
}

Table load_table(const std::filesystem::path& path, bool headers) {
  return load_csv_table(path, headers);
}

struct Outcome {
  ItemRecord record;
  Usage usage;
};

Outcome run_chorus(const ManifestItem& item, ChatBackend& backend, const Ontology& ontology,
                   const PipelineConfig& config) {
  Outcome out;
  auto& rec = out.record;
  switch (item.task) {
    case TaskKind::TableClass: {
      const auto table = load_table(item.table, item.headers);
      rec.gold_labels = {canonical_label(item.gold_labels.front(), TermKind::Class, &ontology)};
      Conversation conversation;
      try {
        const auto result =
            run_table_class_task(table, ontology, backend, config, conversation, out.usage);
        rec.predicted_labels = {result.term.local_name};
        rec.anchored = result.anchored;
        rec.attempts = result.attempts;
      } catch (const TaskFailed& e) {
        rec.predicted_labels = {kNoPrediction};
        rec.attempts = config.max_anchor_attempts;
        rec.failure = e.what();
      }
      break;
    }
    case TaskKind::ColumnType: {
      const auto table = load_table(item.table, item.headers);
      for (const auto& gold : item.gold_labels) {
        rec.gold_labels.push_back(canonical_label(gold, TermKind::Property, &ontology));
      }
      if (rec.gold_labels.size() != table.arity()) {
        throw Error(ErrorCode::ManifestError,
                    "item '" + item.id + "' has " + std::to_string(rec.gold_labels.size()) +
                        " gold labels for " + std::to_string(table.arity()) + " columns");
      }
      Conversation conversation;
      try {
        const auto result =
            run_column_type_task(table, ontology, backend, config, conversation, out.usage);
        for (const auto& assignment : result.assignments) {
          rec.predicted_labels.push_back(assignment ? assignment->local_name : kUnknownLabel);
        }
        rec.anchored = result.anchored;
        rec.attempts = result.attempts;
      } catch (const TaskFailed& e) {
        rec.predicted_labels.assign(table.arity(), kNoPrediction);
        rec.attempts = config.max_anchor_attempts;
        rec.failure = e.what();
      }
      break;
    }
    case TaskKind::Join: {
      const auto left = load_table(item.left, item.headers);
      const auto right = load_table(item.right, item.headers);
      try {
        const auto result = run_join_task(left, right, backend, config);
        out.usage = result.usage;
        const auto& p = result.prediction;
        for (std::size_t i = 0; i < p.left_cols.size(); ++i) {
          rec.predicted_pairs.emplace_back(p.left_cols[i], p.right_cols[i]);
        }
        rec.anchored = result.anchored;
        rec.attempts = result.attempts;
      } catch (const TaskFailed& e) {
        rec.attempts = config.max_anchor_attempts;
        rec.failure = e.what();
      }
      break;
    }
  }
  return out;
}

Outcome run_baseline(const ManifestItem& item, SystemKind system) {
  if (item.task != TaskKind::Join) {
    throw Error(ErrorCode::UnsupportedTask, std::string("the ") + to_string(system) +
                                                " baseline only predicts joins (item '" +
                                                item.id + "')");
  }
  const auto left = load_table(item.left, item.headers);
  const auto right = load_table(item.right, item.headers);
  const auto p = system == SystemKind::Jaccard ? jaccard_join(left, right)
                                               : levenshtein_join(left, right);
  Outcome out;
  for (std::size_t i = 0; i < p.left_cols.size(); ++i) {
    out.record.predicted_pairs.emplace_back(p.left_cols[i], p.right_cols[i]);
  }
  return out;
}

void finish_record(ItemRecord& rec) {
  if (rec.task == TaskKind::Join) {
    const std::set<ColumnPair> gold(rec.gold_pairs.begin(), rec.gold_pairs.end());
    JoinPrediction p;
    for (const auto& [l, r] : rec.predicted_pairs) {
      p.left_cols.push_back(l);
      p.right_cols.push_back(r);
    }
    rec.pairs = join_match(p, gold);
    rec.correct = rec.pairs.correct == rec.pairs.predicted && rec.pairs.correct == rec.pairs.gold;
  } else {
    rec.correct = rec.predicted_labels == rec.gold_labels;
  }
}

// Runs fn(i) for every index with at most `jobs` indices in flight. The
// first exception stops further work and is rethrown.
template <typename Fn>
void for_each_index(std::size_t count, std::size_t jobs, Fn fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const auto worker_count = std::min(jobs, count);
  workers.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const auto i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
}

json metrics_json(const WeightedMetrics& m) {
  json out = json::object();
  out["precision"] = m.precision;
  out["recall"] = m.recall;
  out["f1"] = m.f1;
  return out;
}

}  // namespace

std::vector<ManifestItem> parse_manifest(std::string_view source,
                                         const std::filesystem::path& base_dir) {
  std::vector<ManifestItem> items;
  std::set<std::string> ids;
  std::size_t line_number = 0;
  for (const auto& line : split(source, '\n')) {
    ++line_number;
    if (trim(line).empty()) continue;
    json object;
    try {
      object = json::parse(line);
    } catch (const json::parse_error& e) {
      manifest_error(std::string("invalid JSON: ") + e.what(), line_number);
    }
    if (!object.is_object()) manifest_error("expected a JSON object", line_number);

    ManifestItem item;
    item.id = require_string(object, "id", line_number);
    if (!ids.insert(item.id).second) manifest_error("duplicate id \"" + item.id + "\"", line_number);
    item.task = parse_task(require_string(object, "task", line_number), line_number);
    if (item.task == TaskKind::Join) {
      item.left = resolve(base_dir, require_string(object, "left", line_number));
      item.right = resolve(base_dir, require_string(object, "right", line_number));
    } else {
      item.table = resolve(base_dir, require_string(object, "table", line_number));
    }
    if (const auto headers = object.find("headers"); headers != object.end()) {
      if (!headers->is_boolean()) manifest_error("\"headers\" must be a boolean", line_number);
      item.headers = headers->get<bool>();
    }
    const auto gold = object.find("gold");
    if (gold == object.end()) manifest_error("missing field \"gold\"", line_number);
    parse_gold(item, *gold, line_number);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<ManifestItem> load_manifest(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return parse_manifest(text, path.parent_path());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ManifestError) throw;
    throw Error(ErrorCode::ManifestError, path.string() + ": " + e.what(), e.line());
  }
}

void aggregate(Report& report) {
  struct Acc {
    std::size_t items = 0;
    std::vector<std::string> predictions;
    std::vector<std::string> golds;
    PairCounts pairs;
  };
  std::map<TaskKind, Acc> by_task;
  for (const auto& rec : report.per_item) {
    auto& acc = by_task[rec.task];
    ++acc.items;
    acc.predictions.insert(acc.predictions.end(), rec.predicted_labels.begin(),
                           rec.predicted_labels.end());
    acc.golds.insert(acc.golds.end(), rec.gold_labels.begin(), rec.gold_labels.end());
    acc.pairs += rec.pairs;
  }

  report.items = report.per_item.size();
  report.per_task.clear();
  report.metrics = {};
  std::size_t total_instances = 0;
  for (const auto& [task, acc] : by_task) {
    TaskReport tr;
    tr.task = task;
    tr.items = acc.items;
    if (task == TaskKind::Join) {
      tr.instances = acc.pairs.gold;
      tr.metrics = pair_metrics(acc.pairs);
    } else {
      tr.instances = acc.golds.size();
      if (tr.instances > 0) tr.metrics = weighted_metrics(per_class_stats(acc.predictions, acc.golds));
    }
    const auto w = static_cast<double>(tr.instances);
    report.metrics.precision += w * tr.metrics.precision;
    report.metrics.recall += w * tr.metrics.recall;
    report.metrics.f1 += w * tr.metrics.f1;
    total_instances += tr.instances;
    report.per_task.push_back(tr);
  }
  if (report.per_task.size() == 1) {
    report.metrics = report.per_task.front().metrics;
  } else if (total_instances > 0) {
    const auto n = static_cast<double>(total_instances);
    report.metrics.precision /= n;
    report.metrics.recall /= n;
    report.metrics.f1 /= n;
  }
}

Report run_benchmark(const std::vector<ManifestItem>& manifest, SystemKind system,
                     ChatBackend* backend, const Ontology* ontology,
                     const BenchmarkConfig& config) {
  const bool chorus = system == SystemKind::Chorus;
  if (chorus && (backend == nullptr || ontology == nullptr)) {
    throw Error(ErrorCode::InvalidArgument, "the chorus system needs a backend and an ontology");
  }
  if (config.jobs == 0) throw Error(ErrorCode::InvalidArgument, "jobs must be at least 1");
  if (chorus) config.pipeline.validate();

  std::vector<Outcome> outcomes(manifest.size());
  const std::size_t jobs = chorus && backend->ordered_replay() ? 1 : config.jobs;
  const auto started = std::chrono::steady_clock::now();
  for_each_index(manifest.size(), jobs, [&](std::size_t i) {
    const auto& item = manifest[i];
    auto outcome = chorus ? run_chorus(item, *backend, *ontology, config.pipeline)
                          : run_baseline(item, system);
    outcome.record.id = item.id;
    outcome.record.task = item.task;
    if (item.task == TaskKind::Join) outcome.record.gold_pairs = item.gold_pairs;
    finish_record(outcome.record);
    outcomes[i] = std::move(outcome);
  });
  const auto elapsed = std::chrono::steady_clock::now() - started;

  Report report;
  report.system = system;
  report.temperature = config.pipeline.params.temperature;
  UsageMeter meter;
  for (auto& outcome : outcomes) {
    meter.add(outcome.usage);
    report.per_item.push_back(std::move(outcome.record));
  }
  aggregate(report);

  const auto metered = meter.report();
  report.total_cost = metered.total_cost;
  report.cost_estimated = metered.estimated;
  // Simulated latencies make scripted runs reproducible; otherwise use the
  // clock.
  const double seconds = metered.estimated
                             ? std::chrono::duration<double>(metered.wall_time).count()
                             : std::chrono::duration<double>(elapsed).count();
  report.throughput = seconds > 0.0 ? static_cast<double>(report.items) / seconds : 0.0;
  return report;
}

std::string report_to_json(const Report& report) {
  nlohmann::ordered_json out;
  out["system"] = to_string(report.system);
  if (report.per_task.size() == 1) {
    out["task"] = to_string(report.per_task.front().task);
  } else {
    out["task"] = "mixed";
  }
  out["temperature"] = report.temperature;
  out["items"] = report.items;
  out["metrics"] = metrics_json(report.metrics);
  out["throughput_items_per_second"] = report.throughput;
  out["total_cost_usd"] = report.total_cost.dollars();
  out["cost_estimated"] = report.cost_estimated;
  out["join_instance_unit"] = "column-pair";

  auto per_task = nlohmann::ordered_json::array();
  for (const auto& tr : report.per_task) {
    nlohmann::ordered_json entry;
    entry["task"] = to_string(tr.task);
    entry["items"] = tr.items;
    entry["instances"] = tr.instances;
    entry["metrics"] = metrics_json(tr.metrics);
    per_task.push_back(std::move(entry));
  }
  out["per_task"] = std::move(per_task);

  auto items = nlohmann::ordered_json::array();
  for (const auto& rec : report.per_item) {
    nlohmann::ordered_json entry;
    entry["id"] = rec.id;
    entry["task"] = to_string(rec.task);
    switch (rec.task) {
      case TaskKind::TableClass:
        entry["prediction"] = rec.predicted_labels.empty() ? "" : rec.predicted_labels.front();
        entry["gold"] = rec.gold_labels.empty() ? "" : rec.gold_labels.front();
        break;
      case TaskKind::ColumnType:
        entry["prediction"] = rec.predicted_labels;
        entry["gold"] = rec.gold_labels;
        break;
      case TaskKind::Join: {
        auto pairs = [](const std::vector<ColumnPair>& list) {
          auto arr = nlohmann::ordered_json::array();
          for (const auto& [l, r] : list) arr.push_back({l, r});
          return arr;
        };
        entry["prediction"] = pairs(rec.predicted_pairs);
        entry["gold"] = pairs(rec.gold_pairs);
        entry["correct_pairs"] = rec.pairs.correct;
        entry["predicted_pairs"] = rec.pairs.predicted;
        entry["gold_pairs"] = rec.pairs.gold;
        break;
      }
    }
    entry["correct"] = rec.correct;
    entry["anchored"] = rec.anchored;
    entry["attempts"] = rec.attempts;
    if (rec.failure) entry["failure"] = *rec.failure;
    items.push_back(std::move(entry));
  }
  out["per_item"] = std::move(items);
  return out.dump(2);
}

}  // namespace discovery
