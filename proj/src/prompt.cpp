#include "discovery/prompt.hpp"

#include <algorithm>

#include "discovery/error.hpp"
#include "discovery/text.hpp"

namespace discovery {

namespace {

constexpr std::size_t kMinCellLimit = 8;
constexpr const char* kFence = "```";

bool is_blank_line(std::string_view line) { return trim(line).empty(); }

void require_clean(const std::optional<std::string>& part, const char* name) {
  if (!part) return;
  const auto first_break = part->find('\n');
  const auto last_break = part->rfind('\n');
  const std::string_view text = *part;
  const bool bad_start = is_blank_line(text.substr(0, first_break));
  const bool bad_end =
      last_break != std::string::npos && is_blank_line(text.substr(last_break + 1));
  if (bad_start || bad_end) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("prompt part '") + name + "' starts or ends with a blank line");
  }
}

std::string clip(const std::string& cell, std::size_t limit) {
  if (utf8_length(cell) <= limit) return cell;
  return std::string(utf8_prefix(cell, limit)) + kTruncationMarker;
}

Row clip_row(const Row& row, std::size_t limit) {
  Row out;
  out.reserve(row.size());
  for (const auto& cell : row) out.push_back(clip(cell, limit));
  return out;
}

std::optional<SampleBlock> make_block(const Table& table, std::string label, std::size_t k,
                                      std::size_t cell_limit, const PromptConfig& config) {
  const auto sample = sample_rows(table, k, config.strategy);
  SampleBlock block;
  block.label = std::move(label);
  if (config.include_metadata && table.headers()) {
    block.header = to_csv_line(clip_row(*table.headers(), cell_limit));
  }
  std::vector<Row> rows;
  rows.reserve(sample.rows().size());
  for (const auto& row : sample.rows()) rows.push_back(clip_row(row, cell_limit));
  block.rows = to_csv_rows(rows);
  if (!block.header && block.rows.empty()) return std::nullopt;
  return block;
}

void render_block(std::string& out, const SampleBlock& block) {
  if (!block.label.empty()) {
    out += block.label;
    out += "\n\n";
  }
  out += kFence;
  out += '\n';
  if (block.header) {
    out += *block.header;
    out += '\n';
  }
  if (!block.rows.empty()) {
    out += block.rows;
    out += '\n';
  }
  out += kFence;
}

// Builds components with the configured sample size and cell limit, then
// shrinks the sample and the cell limit until the prompt fits the budget.
template <typename Build>
PromptComponents fit_budget(const PromptConfig& config, std::size_t max_rows, Build build) {
  if (config.sample_k == 0) throw Error(ErrorCode::InvalidArgument, "sample_k must be at least 1");
  std::size_t k = std::max<std::size_t>(1, std::min(config.sample_k, max_rows));
  std::size_t cell_limit = config.cell_limit;
  for (;;) {
    auto components = build(k, cell_limit);
    if (assemble(components).size() <= config.char_budget) return components;
    if (k > 1) {
      --k;
    } else if (cell_limit > kMinCellLimit) {
      cell_limit = std::max(kMinCellLimit, cell_limit / 2);
    } else {
      throw Error(ErrorCode::PromptBudgetExceeded,
                  "prompt exceeds " + std::to_string(config.char_budget) +
                      " bytes even with one row and " + std::to_string(kMinCellLimit) +
                      "-character cells");
    }
  }
}

}  // namespace

std::string assemble(const PromptComponents& components) {
  require_clean(components.instruction, "instruction");
  require_clean(components.demonstration, "demonstration");
  require_clean(components.metadata, "metadata");
  require_clean(components.task_knowledge, "task_knowledge");
  require_clean(components.prefix, "prefix");

  std::vector<std::string> paragraphs;
  const auto add = [&](const std::optional<std::string>& part) {
    if (part) paragraphs.push_back(*part);
  };
  add(components.instruction);
  add(components.task_knowledge);
  add(components.demonstration);
  add(components.metadata);
  for (const auto& block : components.data_sample) {
    std::string rendered;
    render_block(rendered, block);
    paragraphs.push_back(std::move(rendered));
  }
  add(components.prefix);

  if (paragraphs.empty()) throw Error(ErrorCode::InvalidArgument, "prompt has no components");
  return join(paragraphs, "\n\n");
}

PromptComponents table_class_prompt(const Table& table,
                                    const std::optional<std::vector<std::string>>& allowed_classes,
                                    const PromptConfig& config) {
  if (table.rows().empty() && !table.headers()) {
    throw Error(ErrorCode::EmptyTable, "table '" + table.name() + "' has no rows or headers");
  }
  const bool supervised = allowed_classes && !allowed_classes->empty();
  return fit_budget(config, table.rows().size(), [&](std::size_t k, std::size_t cell_limit) {
    PromptComponents c;
    c.instruction = std::string(prompt_text::kTableClassInstruction) +
                    (supervised ? " from the following list:" : ".");
    if (supervised) c.task_knowledge = join(*allowed_classes, ", ") + ".";
    if (config.include_demonstration) c.demonstration = prompt_text::kTableClassDemonstration;
    if (auto block = make_block(table, "", k, cell_limit, config)) {
      c.data_sample.push_back(std::move(*block));
    }
    if (config.include_prefix) c.prefix = prompt_text::kTableClassPrefix;
    return c;
  });
}

PromptComponents column_type_prompt(const Table& table, const PromptConfig& config) {
  if (table.rows().empty() && !table.headers()) {
    throw Error(ErrorCode::EmptyTable, "table '" + table.name() + "' has no rows or headers");
  }
  return fit_budget(config, table.rows().size(), [&](std::size_t k, std::size_t cell_limit) {
    PromptComponents c;
    c.instruction = prompt_text::kColumnTypeInstruction;
    if (config.include_demonstration) c.demonstration = prompt_text::kColumnTypeDemonstration;
    if (auto block = make_block(table, "", k, cell_limit, config)) {
      c.data_sample.push_back(std::move(*block));
    }
    return c;
  });
}

PromptComponents join_prompt(const Table& left, const Table& right, const PromptConfig& config,
                             const std::optional<std::string>& context_notes) {
  for (const auto* table : {&left, &right}) {
    if (table->rows().empty()) {
      throw Error(ErrorCode::EmptyTable, "table '" + table->name() + "' has no rows");
    }
  }
  const auto max_rows = std::max(left.rows().size(), right.rows().size());
  return fit_budget(config, max_rows, [&](std::size_t k, std::size_t cell_limit) {
    PromptComponents c;
    c.instruction = prompt_text::kJoinInstruction;
    if (config.include_metadata && context_notes && !trim(*context_notes).empty()) {
      c.metadata = std::string(trim(*context_notes));
    }
    for (const auto& [table, label] : {std::pair{&left, "df1 ="}, std::pair{&right, "df2 ="}}) {
      if (auto block = make_block(*table, label, k, cell_limit, config)) {
        c.data_sample.push_back(std::move(*block));
      }
    }
    if (config.include_prefix) c.prefix = prompt_text::kJoinPrefix;
    return c;
  });
}

}  // namespace discovery
