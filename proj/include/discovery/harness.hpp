#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "discovery/backend.hpp"
#include "discovery/error.hpp"
#include "discovery/ontology.hpp"
#include "discovery/prompt.hpp"
#include "discovery/table.hpp"

namespace discovery {

enum class ViolationKind {
  UnparsableOutput,
  UnknownClass,
  UnknownProperty,
  NonexistentColumn,
  ArityMismatch,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::UnparsableOutput;
  std::string offending_text;
  std::optional<std::size_t> position;  // only for UnknownProperty / NonexistentColumn
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Thrown by the parsers for output they cannot read.
class ViolationError : public Error {
 public:
  explicit ViolationError(Violation violation);
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

// A task gave up; carries the last violation seen.
class TaskFailed : public Error {
 public:
  explicit TaskFailed(Violation violation);
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

// Parsed but unchecked model answers.
struct ClassCandidate {
  std::string label;
};

struct ColumnCandidates {
  std::vector<std::string> labels;
};

struct JoinPrediction {
  std::vector<std::string> left_cols;
  std::vector<std::string> right_cols;

  friend bool operator==(const JoinPrediction&, const JoinPrediction&) = default;
};

struct TableClassResult {
  OntologyTerm term;
  std::string raw_response;
  bool anchored = false;
  std::size_t attempts = 0;
};

struct ColumnTypeResult {
  // One entry per column; nullopt means Unknown.
  std::vector<std::optional<OntologyTerm>> assignments;
  std::string raw_response;
  bool anchored = false;
  std::size_t attempts = 0;
};

struct PipelineConfig {
  bool anchoring_enabled = true;
  std::size_t max_anchor_attempts = 3;
  bool context_flow = true;
  PromptConfig prompt;
  GenerationParams params;
  // Restricts table-class prompts to these local names when set.
  std::optional<std::vector<std::string>> allowed_classes;
  // Repair metric; label_similarity when empty.
  Similarity similarity;

  void validate() const;
};

inline constexpr const char* kUnknownLabel = "Unknown";
inline constexpr const char* kClarifyLabel = "Answer with only the label.";
inline constexpr const char* kClarifyLabels =
    "Answer with only the comma-separated list of labels, one per column.";

// --- parsing ---------------------------------------------------------------

/// First "http(s)://dbpedia.org/ontology/..." token, else the first
/// backtick-delimited token, unnormalized. Throws ViolationError
/// (UnparsableOutput).
std::string parse_table_class(std::string_view response);

/// Items of the first backtick-delimited list (or the first non-blank line),
/// trimmed, with "Unknown" normalized to kUnknownLabel. Throws ViolationError
/// (UnparsableOutput).
std::vector<std::string> split_column_list(std::string_view response);

/// split_column_list plus an arity check against `columns`. Throws
/// ViolationError (ArityMismatch) when the counts differ.
std::vector<std::string> parse_column_types(std::string_view response, std::size_t columns);

/// Reads the remainder of a merge call after "left_on=": a quoted name or a
/// bracketed list, then right_on=..., or a lone on=... . A full
/// "pd.merge(df1, df2, ...)" echo is accepted too. Throws ViolationError
/// (UnparsableOutput) naming the unconsumed suffix.
JoinPrediction parse_join_completion(std::string_view response);

/// Inverse of parse_join_completion: "'a', right_on='b')" or list form.
std::string format_join_completion(const JoinPrediction& prediction);

// --- constraint checks -----------------------------------------------------

std::optional<Violation> check(const ClassCandidate& candidate, const Ontology& ontology);
std::optional<Violation> check(const ColumnCandidates& candidates, const Ontology& ontology);
std::optional<Violation> check(const JoinPrediction& prediction, const Table& left,
                               const Table& right);

// --- anchoring -------------------------------------------------------------

/// Returns a copy of `conversation` whose final Assistant turn reads
/// `replacement`. Throws InvalidState if the last turn is not an Assistant
/// turn.
Conversation anchor(const Conversation& conversation, std::string replacement);

/// IRI of the nearest class to the offending label. Throws RepairUnavailable
/// unless `violation` is UnknownClass.
std::string repair_text(const Violation& violation, const Ontology& ontology,
                        const ClassCandidate& original, const Similarity& similarity = {});

/// The original list, rendered in backticks, with the offending position
/// replaced by its nearest property in the item's own notation (short
/// prefix, IRI or bare). Throws RepairUnavailable unless `violation` is
/// UnknownProperty.
std::string repair_text(const Violation& violation, const Ontology& ontology,
                        const ColumnCandidates& original, const Similarity& similarity = {});

/// Backtick-quoted, comma-separated rendering of a column list.
std::string render_column_list(const std::vector<std::string>& labels);

// --- pipelines -------------------------------------------------------------

/// Appends the table-class prompt to `conversation` and runs the task,
/// leaving the (possibly anchored) exchange in `conversation`.
TableClassResult run_table_class_task(const Table& table, const Ontology& ontology,
                                      ChatBackend& backend, const PipelineConfig& config,
                                      Conversation& conversation, Usage& usage);

ColumnTypeResult run_column_type_task(const Table& table, const Ontology& ontology,
                                      ChatBackend& backend, const PipelineConfig& config,
                                      Conversation& conversation, Usage& usage);

struct TablePipelineResult {
  TableClassResult table_class;
  ColumnTypeResult column_types;
  Usage usage;
  // One conversation with context flow, otherwise one per task.
  std::vector<Conversation> conversations;
};

/// Table-class detection followed by column-type annotation.
TablePipelineResult run_table_pipeline(const Table& table, const Ontology& ontology,
                                       ChatBackend& backend, const PipelineConfig& config);

struct JoinResult {
  JoinPrediction prediction;
  std::string raw_response;
  bool anchored = false;  // true when a re-ask was needed
  std::size_t attempts = 0;
  Usage usage;
  Conversation conversation;
};

/// Join-column prediction in a fresh conversation. Throws Precondition when
/// either table lacks headers, before any backend call.
JoinResult run_join_task(const Table& left, const Table& right, ChatBackend& backend,
                         const PipelineConfig& config,
                         const std::optional<std::string>& context_notes = std::nullopt);

}  // namespace discovery
