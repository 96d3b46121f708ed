#include <gtest/gtest.h>

#include <json.hpp>

#include "discovery/benchmark.hpp"
#include "discovery/error.hpp"
#include "fixtures.hpp"

using namespace discovery;

namespace {

// Answers by looking at the prompt, so call order does not matter.
class KeywordBackend final : public ChatBackend {
 public:
  Completion complete(const Conversation& conversation, const GenerationParams&) override {
    const auto& prompt = conversation.back().text;
    Completion out;
    out.usage.prompt_tokens = 10;
    out.usage.completion_tokens = 2;
    out.usage.cost = PriceTable{}.cost(10, 2);
    if (prompt.find("pd.merge") != std::string::npos) {
      out.text = "'VIN_prefix', right_on='vehicle_id_number')";
    } else if (prompt.find("Panthera") != std::string::npos) {
      out.text = "https://dbpedia.org/ontology/Animal";
    } else {
      out.text = "https://dbpedia.org/ontology/ElectricVehicle";
    }
    return out;
  }
};

std::string table_item(const std::string& id, const std::string& table, const std::string& gold) {
  return R"({"id": ")" + id + R"(", "task": "table-class", "table": ")" + table +
         R"(", "headers": true, "gold": ")" + gold + "\"}\n";
}

std::string join_item(const std::string& id, const std::string& gold_l, const std::string& gold_r) {
  return R"({"id": ")" + id +
         R"(", "task": "join", "left": "ev_table.csv", "right": "registration.csv", "headers": true, "gold": [[")" +
         gold_l + R"(", ")" + gold_r + "\"]]}\n";
}

std::vector<ManifestItem> manifest(const std::string& text) {
  return parse_manifest(text, fixtures::dir());
}

}  // namespace

TEST(Manifest, ParsesItemsAndResolvesPaths) {
  const auto items = manifest(table_item("t1", "ev_table.csv", "ElectricVehicle") +
                              R"({"id": "c1", "task": "column-type", "table": "animals.csv", "gold": ["conservationStatus", "binomial"]})"
                              "\n\n" +
                              join_item("j1", "VIN_prefix", "vehicle_id_number"));
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].task, TaskKind::TableClass);
  EXPECT_EQ(items[0].table, fixtures::dir() / "ev_table.csv");
  EXPECT_EQ(items[1].gold_labels.size(), 2u);
  EXPECT_TRUE(items[1].headers);
  EXPECT_EQ(items[2].gold_pairs, (std::vector<ColumnPair>{{"VIN_prefix", "vehicle_id_number"}}));
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  const auto good = table_item("a", "ev_table.csv", "X");
  for (const auto& bad : {std::string("{\"id\": \"b\"}\n"), std::string("not json\n"),
                          std::string(R"({"id": "b", "task": "sorting", "table": "x", "gold": "y"})"),
                          std::string(R"({"id": "b", "task": "join", "left": "x", "right": "y", "gold": [["a"]]})"),
                          std::string(R"({"id": "a", "task": "table-class", "table": "x", "gold": "y"})"),
                          std::string(R"({"id": "b", "task": "table-class", "table": "x", "headers": "yes", "gold": "y"})")}) {
    try {
      manifest(good + "\n" + bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ManifestError) << bad;
      EXPECT_EQ(e.line(), 3u) << bad;
    }
  }
}

TEST(RunBenchmark, AllCorrectTableClass) {
  const auto items = manifest(table_item("a", "ev_table.csv", "ElectricVehicle") +
                              table_item("b", "animals.csv", "dbo:Animal") +
                              table_item("c", "ev_table.csv", "https://dbpedia.org/ontology/electricvehicle"));
  const auto ontology = fixtures::ontology();
  ScriptedBackend backend({{std::nullopt, "https://dbpedia.org/ontology/ElectricVehicle"},
                           {std::nullopt, "https://dbpedia.org/ontology/Animal"},
                           {std::nullopt, "`ElectricVehicle`"}});
  const auto report = run_benchmark(items, SystemKind::Chorus, &backend, &ontology, {});
  EXPECT_EQ(report.items, 3u);
  EXPECT_DOUBLE_EQ(report.metrics.f1, 1.0);
  EXPECT_GT(report.throughput, 0.0);
  EXPECT_GT(report.total_cost.nanos, 0);
  EXPECT_TRUE(report.cost_estimated);
  // Three calls at 20 ms simulated latency each.
  EXPECT_DOUBLE_EQ(report.throughput, 3.0 / 0.06);
}

TEST(RunBenchmark, BaselineJoinHasNoCost) {
  const auto items = manifest(join_item("j1", "VIN_prefix", "vehicle_id_number"));
  const auto report = run_benchmark(items, SystemKind::Levenshtein, nullptr, nullptr, {});
  EXPECT_EQ(report.items, 1u);
  EXPECT_EQ(report.total_cost.nanos, 0);
  // brand, model and zip are all 4 edits from name; the smallest left name wins.
  EXPECT_EQ(report.per_item[0].predicted_pairs, (std::vector<ColumnPair>{{"Brand", "name"}}));
  EXPECT_FALSE(report.per_item[0].correct);

  const auto jaccard = run_benchmark(items, SystemKind::Jaccard, nullptr, nullptr, {});
  EXPECT_EQ(jaccard.per_item[0].predicted_pairs,
            (std::vector<ColumnPair>{{"VIN_prefix", "vehicle_id_number"}}));
  EXPECT_DOUBLE_EQ(jaccard.metrics.f1, 1.0);
}

TEST(RunBenchmark, BaselinesRejectClassificationTasks) {
  const auto items = manifest(table_item("a", "ev_table.csv", "ElectricVehicle"));
  try {
    run_benchmark(items, SystemKind::Jaccard, nullptr, nullptr, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedTask);
  }
}

TEST(RunBenchmark, MixedResultsMatchConfusionOracle) {
  const auto items = manifest(table_item("a", "ev_table.csv", "ElectricVehicle") +
                              table_item("b", "animals.csv", "Animal") +
                              table_item("c", "ev_table.csv", "Automobile") +
                              table_item("d", "animals.csv", "Animal"));
  const auto ontology = fixtures::ontology();
  ScriptedBackend backend({{std::nullopt, "https://dbpedia.org/ontology/ElectricVehicle"},
                           {std::nullopt, "https://dbpedia.org/ontology/Hospital"},
                           {std::nullopt, "https://dbpedia.org/ontology/ElectricVehicle"},
                           {std::nullopt, "https://dbpedia.org/ontology/Animal"}});
  const auto report = run_benchmark(items, SystemKind::Chorus, &backend, &ontology, {});
  const auto oracle = weighted_metrics(per_class_stats(
      {"ElectricVehicle", "Hospital", "ElectricVehicle", "Animal"},
      {"ElectricVehicle", "Animal", "Automobile", "Animal"}));
  EXPECT_EQ(report.metrics.precision, oracle.precision);
  EXPECT_EQ(report.metrics.recall, oracle.recall);
  EXPECT_EQ(report.metrics.f1, oracle.f1);
}

TEST(RunBenchmark, TaskFailureIsRecordedNotFatal) {
  const auto items = manifest(table_item("a", "ev_table.csv", "ElectricVehicle") +
                              table_item("b", "animals.csv", "Animal"));
  const auto ontology = fixtures::ontology();
  ScriptedBackend backend({{std::nullopt, "no idea"},
                           {std::nullopt, "still no idea"},
                           {std::nullopt, "https://dbpedia.org/ontology/Animal"}});
  const auto report = run_benchmark(items, SystemKind::Chorus, &backend, &ontology, {});
  ASSERT_EQ(report.per_item.size(), 2u);
  EXPECT_FALSE(report.per_item[0].correct);
  EXPECT_TRUE(report.per_item[0].failure);
  EXPECT_EQ(report.per_item[0].predicted_labels, (std::vector<std::string>{kNoPrediction}));
  EXPECT_TRUE(report.per_item[1].correct);
  EXPECT_DOUBLE_EQ(report.metrics.recall, 0.5);
}

TEST(RunBenchmark, BackendErrorsPropagate) {
  const auto items = manifest(table_item("a", "ev_table.csv", "ElectricVehicle"));
  const auto ontology = fixtures::ontology();
  ScriptedBackend backend({});
  try {
    run_benchmark(items, SystemKind::Chorus, &backend, &ontology, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendExhausted);
  }
}

TEST(RunBenchmark, ParallelRunMatchesSequential) {
  std::string text;
  for (int i = 0; i < 12; ++i) {
    const auto id = std::to_string(i);
    if (i % 3 == 0) {
      text += join_item("j" + id, "VIN_prefix", "vehicle_id_number");
    } else {
      text += table_item("t" + id, i % 2 ? "animals.csv" : "ev_table.csv",
                         i % 4 ? "Animal" : "ElectricVehicle");
    }
  }
  const auto items = manifest(text);
  const auto ontology = fixtures::ontology();
  KeywordBackend backend;
  BenchmarkConfig one;
  one.jobs = 1;
  BenchmarkConfig many;
  many.jobs = 4;
  const auto a = run_benchmark(items, SystemKind::Chorus, &backend, &ontology, one);
  const auto b = run_benchmark(items, SystemKind::Chorus, &backend, &ontology, many);
  EXPECT_EQ(a.metrics.f1, b.metrics.f1);
  EXPECT_EQ(a.total_cost, b.total_cost);
  ASSERT_EQ(a.per_item.size(), b.per_item.size());
  for (std::size_t i = 0; i < a.per_item.size(); ++i) {
    EXPECT_EQ(a.per_item[i].id, b.per_item[i].id);
    EXPECT_EQ(a.per_item[i].correct, b.per_item[i].correct);
  }
}

TEST(ReportJson, FieldsAndOrder) {
  const auto items = manifest(join_item("j1", "VIN_prefix", "vehicle_id_number"));
  const auto report = run_benchmark(items, SystemKind::Jaccard, nullptr, nullptr, {});
  const auto text = report_to_json(report);
  const auto doc = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [key, value] : doc.items()) keys.push_back(key);
  EXPECT_EQ(keys, (std::vector<std::string>{"system", "task", "temperature", "items", "metrics",
                                            "throughput_items_per_second", "total_cost_usd",
                                            "cost_estimated", "join_instance_unit", "per_task",
                                            "per_item"}));
  EXPECT_EQ(doc["system"], "jaccard");
  EXPECT_EQ(doc["task"], "join");
  EXPECT_EQ(doc["items"], 1);
  EXPECT_EQ(doc["per_item"].size(), 1u);
  EXPECT_EQ(doc["per_item"][0]["prediction"][0][1], "vehicle_id_number");
  EXPECT_EQ(doc["per_item"][0]["correct"], true);
}
