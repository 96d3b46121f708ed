#include "discovery/cli.hpp"

#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "discovery/backend.hpp"
#include "discovery/benchmark.hpp"
#include "discovery/error.hpp"
#include "discovery/eval.hpp"
#include "discovery/harness.hpp"
#include "discovery/http_backend.hpp"
#include "discovery/ontology.hpp"
#include "discovery/prompt.hpp"
#include "discovery/table.hpp"
#include "discovery/text.hpp"

namespace discovery {

namespace {

struct CliConfig {
  std::string backend_spec;
  std::string ontology_path;
  std::size_t sample_rows = 5;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
  bool no_demonstration = false;
  bool no_metadata = false;
  bool no_prefix = false;
  bool no_anchoring = false;
  bool no_context_flow = false;
  std::size_t max_attempts = 3;
  bool headers = false;
  bool dump_prompt = false;
  std::size_t jobs = 4;
  std::string report_path;

  // Command arguments.
  std::string csv;
  std::string left;
  std::string right;
  std::string classes_path;
  std::string baseline = "none";
  std::string manifest;
  std::string system = "chorus";
};

void add_common(CLI::App& cmd, CliConfig& c) {
  cmd.add_option("--backend", c.backend_spec, "scripted:<transcript.jsonl> or http:<url>");
  cmd.add_option("--ontology", c.ontology_path, "ontology file (C/P tab-tagged IRIs)");
  cmd.add_option("--sample-rows", c.sample_rows, "rows serialized into prompts")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--temperature", c.temperature, "sampling temperature")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--seed", c.seed, "sample rows at random with this seed");
  cmd.add_flag("--no-demonstration", c.no_demonstration, "omit the worked example");
  cmd.add_flag("--no-metadata", c.no_metadata, "omit header lines and notes");
  cmd.add_flag("--no-prefix", c.no_prefix, "omit the answer prefix");
  cmd.add_flag("--no-anchoring", c.no_anchoring, "disable history repair and re-asking");
  cmd.add_flag("--no-context-flow", c.no_context_flow, "run each task in its own conversation");
  cmd.add_option("--max-attempts", c.max_attempts, "model calls allowed per task")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--headers", c.headers, "treat the first CSV line as the header row");
  cmd.add_flag("--dump-prompt", c.dump_prompt, "print the first prompt and exit");
}

PipelineConfig pipeline_config(const CliConfig& c) {
  PipelineConfig config;
  config.anchoring_enabled = !c.no_anchoring;
  config.max_anchor_attempts = c.max_attempts;
  config.context_flow = !c.no_context_flow;
  config.prompt.sample_k = c.sample_rows;
  config.prompt.include_demonstration = !c.no_demonstration;
  config.prompt.include_metadata = !c.no_metadata;
  config.prompt.include_prefix = !c.no_prefix;
  if (c.seed) config.prompt.strategy = SamplingStrategy::seeded(*c.seed);
  config.params.temperature = c.temperature;
  return config;
}

std::unique_ptr<ChatBackend> make_backend(const CliConfig& c) {
  const std::string_view spec = c.backend_spec;
  if (spec.empty()) throw Error(ErrorCode::InvalidArgument, "--backend is required");
  if (spec.rfind("scripted:", 0) == 0) {
    const std::filesystem::path path(std::string(spec.substr(9)));
    try {
      return std::make_unique<ScriptedBackend>(parse_transcript(read_text_file(path)));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
  }
  if (spec.rfind("http:", 0) == 0) {
    auto endpoint = endpoint_from_environment(std::string(spec.substr(5)));
    const auto seed = c.seed ? *c.seed : std::uint64_t{std::random_device{}()};
    return std::make_unique<HttpBackend>(std::move(endpoint), HttpBackend::Sleeper{}, seed);
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown backend \"" + c.backend_spec + "\"; use scripted:<path> or http:<url>");
}

Ontology load_ontology_arg(const CliConfig& c) {
  if (c.ontology_path.empty()) throw Error(ErrorCode::InvalidArgument, "--ontology is required");
  try {
    return load_ontology_file(c.ontology_path);
  } catch (const Error& e) {
    throw Error(e.code(), c.ontology_path + ": " + e.what());
  }
}

Table load_table_arg(const std::string& path, bool headers) {
  try {
    return load_csv_table(path, headers);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::optional<std::vector<std::string>> load_classes(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::vector<std::string> classes;
  for (const auto& line : split(read_text_file(path), '\n')) {
    const auto item = trim(line);
    if (item.empty() || item.front() == '#') continue;
    classes.emplace_back(item);
  }
  return classes;
}

std::string join_names(const std::vector<std::string>& names) { return join(names, ","); }

int classify_table(const CliConfig& c, std::ostream& out) {
  const auto table = load_table_arg(c.csv, c.headers);
  auto config = pipeline_config(c);
  config.allowed_classes = load_classes(c.classes_path);
  if (c.dump_prompt) {
    out << assemble(table_class_prompt(table, config.allowed_classes, config.prompt)) << '\n';
    return kExitOk;
  }
  const auto ontology = load_ontology_arg(c);
  auto backend = make_backend(c);
  Conversation conversation;
  Usage usage;
  const auto result =
      run_table_class_task(table, ontology, *backend, config, conversation, usage);
  out << result.term.iri << '\t' << (result.anchored ? "true" : "false") << '\t'
      << result.attempts << '\n';
  return kExitOk;
}

int annotate_columns(const CliConfig& c, std::ostream& out) {
  const auto table = load_table_arg(c.csv, c.headers);
  const auto config = pipeline_config(c);
  if (c.dump_prompt) {
    out << assemble(column_type_prompt(table, config.prompt)) << '\n';
    return kExitOk;
  }
  const auto ontology = load_ontology_arg(c);
  auto backend = make_backend(c);
  const auto result = run_table_pipeline(table, ontology, *backend, config);
  const auto& assignments = result.column_types.assignments;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    out << i << '\t' << (assignments[i] ? ontology.compact(*assignments[i]) : kUnknownLabel)
        << '\n';
  }
  return kExitOk;
}

int predict_join(const CliConfig& c, std::ostream& out) {
  const auto left = load_table_arg(c.left, c.headers);
  const auto right = load_table_arg(c.right, c.headers);
  JoinPrediction prediction;
  if (c.baseline == "jaccard") {
    prediction = jaccard_join(left, right);
  } else if (c.baseline == "levenshtein") {
    prediction = levenshtein_join(left, right);
  } else {
    const auto config = pipeline_config(c);
    if (c.dump_prompt) {
      out << assemble(join_prompt(left, right, config.prompt)) << '\n';
      return kExitOk;
    }
    auto backend = make_backend(c);
    prediction = run_join_task(left, right, *backend, config).prediction;
  }
  out << join_names(prediction.left_cols) << '\t' << join_names(prediction.right_cols) << '\n';
  return kExitOk;
}

int evaluate(const CliConfig& c, std::ostream& out) {
  const auto manifest = load_manifest(c.manifest);
  SystemKind system = SystemKind::Chorus;
  if (c.system == "jaccard") system = SystemKind::Jaccard;
  if (c.system == "levenshtein") system = SystemKind::Levenshtein;

  BenchmarkConfig config;
  config.pipeline = pipeline_config(c);
  config.pipeline.allowed_classes = load_classes(c.classes_path);
  config.jobs = c.jobs;

  std::optional<Ontology> ontology;
  std::unique_ptr<ChatBackend> backend;
  if (system == SystemKind::Chorus) {
    ontology = load_ontology_arg(c);
    backend = make_backend(c);
  }
  const auto report = run_benchmark(manifest, system, backend.get(),
                                    ontology ? &*ontology : nullptr, config);
  if (!c.report_path.empty()) {
    std::ofstream file(c.report_path, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + c.report_path);
    file << report_to_json(report) << '\n';
  }
  char line[160];
  std::snprintf(line, sizeof line, "P=%.3f R=%.3f F1=%.3f items=%zu cost=%.6f",
                report.metrics.precision, report.metrics.recall, report.metrics.f1, report.items,
                report.total_cost.dollars());
  out << line << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::TaskFailed:
    case ErrorCode::Unparsable:
    case ErrorCode::BackendExhausted:
    case ErrorCode::MatchFailed:
    case ErrorCode::TransportError:
    case ErrorCode::RateLimited:
    case ErrorCode::MalformedResponse:
      return kExitFailed;
    default:
      return kExitUsage;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annotate tables and predict joins with a chat model", "discover"};
  app.require_subcommand(1);
  CliConfig c;

  auto* classify = app.add_subcommand("classify-table", "print the table's ontology class");
  classify->add_option("csv", c.csv, "table CSV")->required();
  classify->add_option("--classes", c.classes_path, "file of allowed class names, one per line");
  add_common(*classify, c);

  auto* annotate = app.add_subcommand("annotate-columns", "print one property per column");
  annotate->add_option("csv", c.csv, "table CSV")->required();
  add_common(*annotate, c);

  auto* join = app.add_subcommand("predict-join", "print the join columns of two tables");
  join->add_option("left", c.left, "left table CSV (df1)")->required();
  join->add_option("right", c.right, "right table CSV (df2)")->required();
  join->add_option("--baseline", c.baseline, "none, jaccard or levenshtein")
      ->check(CLI::IsMember({"none", "jaccard", "levenshtein"}));
  add_common(*join, c);

  auto* eval = app.add_subcommand("eval", "run a benchmark manifest");
  eval->add_option("manifest", c.manifest, "JSON-lines manifest")->required();
  eval->add_option("--system", c.system, "chorus, jaccard or levenshtein")
      ->check(CLI::IsMember({"chorus", "jaccard", "levenshtein"}));
  eval->add_option("--report", c.report_path, "write the JSON report here");
  eval->add_option("--jobs", c.jobs, "items evaluated concurrently")->check(CLI::PositiveNumber);
  eval->add_option("--classes", c.classes_path, "file of allowed class names, one per line");
  add_common(*eval, c);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (classify->parsed()) return classify_table(c, out);
    if (annotate->parsed()) return annotate_columns(c, out);
    if (join->parsed()) return predict_join(c, out);
    return evaluate(c, out);
  } catch (const Error& e) {
    err << "discover: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "discover: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace discovery
