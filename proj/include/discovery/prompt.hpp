#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "discovery/table.hpp"

namespace discovery {

// One fenced data sample. `header` is the metadata line shown inside the
// fence directly above the rows; `label` (e.g. "df1 =") precedes the fence.
struct SampleBlock {
  std::string label;
  std::optional<std::string> header;
  std::string rows;

  friend bool operator==(const SampleBlock&, const SampleBlock&) = default;
};

// The prompt parts. The conversational context is not a field here: it is
// carried by the prior turns of the conversation the prompt is appended to.
struct PromptComponents {
  std::optional<std::string> instruction;
  std::optional<std::string> demonstration;
  std::vector<SampleBlock> data_sample;
  // Free-text metadata shown above the samples (prior findings for joins).
  // Column headers live in SampleBlock::header.
  std::optional<std::string> metadata;
  std::optional<std::string> task_knowledge;
  std::optional<std::string> prefix;

  friend bool operator==(const PromptComponents&, const PromptComponents&) = default;
};

struct PromptConfig {
  std::size_t sample_k = 5;
  bool include_demonstration = true;
  bool include_metadata = true;
  bool include_prefix = true;
  SamplingStrategy strategy = SamplingStrategy::head();
  std::size_t cell_limit = 256;      // code points kept per cell before the marker
  std::size_t char_budget = 16384;   // upper bound on the assembled prompt, in bytes
};

// Appended to cells cut at PromptConfig::cell_limit.
inline constexpr const char* kTruncationMarker = "…";

/// Concatenates present parts in the order instruction, task knowledge,
/// demonstration, metadata, fenced samples, prefix, separated by one blank
/// line. Throws InvalidArgument when no part is present or a part starts or
/// ends with a blank line.
std::string assemble(const PromptComponents& components);

/// Table-class prompt. With `allowed_classes` the model is asked to pick from
/// that list; without it any ontology class is acceptable.
PromptComponents table_class_prompt(const Table& table,
                                    const std::optional<std::vector<std::string>>& allowed_classes,
                                    const PromptConfig& config);

PromptComponents column_type_prompt(const Table& table, const PromptConfig& config);

/// Code-completion prompt ending in "pd.merge(df1, df2, left_on=" when the
/// prefix is enabled. `context_notes` join the metadata when metadata is on.
PromptComponents join_prompt(const Table& left, const Table& right, const PromptConfig& config,
                             const std::optional<std::string>& context_notes = std::nullopt);

namespace prompt_text {

inline constexpr const char* kTableClassInstruction =
    "For the following CSV sample, select one DBpedia.org ontology that represents the dataset";
inline constexpr const char* kTableClassDemonstration =
    "For example, for a dataset about hospitals, return `https://dbpedia.org/ontology/Hospital`.";
inline constexpr const char* kTableClassPrefix =
    "Begin your answer with 'https://dbpedia.org/ontology'.";

inline constexpr const char* kColumnTypeInstruction =
    "For the following CSV sample, suggest a DBPedia.org Property for each column from the "
    "`dbo:` namespace.";
inline constexpr const char* kColumnTypeDemonstration =
    "Consider this example. Input:\n"
    "```\n"
    "Name, Famous Book, Rk, Year\n"
    "Fyodor Dostoevsky, Crime and Punishment, 22.5, 1866\n"
    "Mark Twain, Adventures of Huckleberry Finn, 53, 1884\n"
    "Albert Camus, The Stranger, -23, 1942\n"
    "```\n"
    "Output:\n"
    "`dbo:author, dbo:title, Unknown, dbo:releaseDate`.";

inline constexpr const char* kJoinInstruction =
    "Given two Pandas Dataframes, suggest what `pd.merge` parameters to use to join the "
    "dataframes.";
inline constexpr const char* kJoinPrefix =
    "Complete the correct Pandas merge command. `pd.merge(df1, df2, left_on=";

}  // namespace prompt_text

}  // namespace discovery
