#include "discovery/harness.hpp"

#include <algorithm>
#include <cctype>

#include "discovery/text.hpp"

namespace discovery {

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnparsableOutput: return "UnparsableOutput";
    case ViolationKind::UnknownClass: return "UnknownClass";
    case ViolationKind::UnknownProperty: return "UnknownProperty";
    case ViolationKind::NonexistentColumn: return "NonexistentColumn";
    case ViolationKind::ArityMismatch: return "ArityMismatch";
  }
  return "UnparsableOutput";
}

namespace {

std::string describe(const Violation& v) {
  std::string out = to_string(v.kind);
  out += " '" + v.offending_text + "'";
  if (v.position) out += " at column " + std::to_string(*v.position);
  if (!v.detail.empty()) out += ": " + v.detail;
  return out;
}

Violation unparsable(std::string_view text, std::string detail) {
  return Violation{ViolationKind::UnparsableOutput, std::string(text), std::nullopt,
                   std::move(detail)};
}

}  // namespace

ViolationError::ViolationError(Violation violation)
    : Error(ErrorCode::Unparsable, describe(violation)), violation_(std::move(violation)) {}

TaskFailed::TaskFailed(Violation violation)
    : Error(ErrorCode::TaskFailed, describe(violation)), violation_(std::move(violation)) {}

void PipelineConfig::validate() const {
  if (max_anchor_attempts < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_anchor_attempts must be at least 1");
  }
  if (prompt.sample_k < 1) throw Error(ErrorCode::InvalidArgument, "sample_k must be at least 1");
  params.validate();
}

// --- parsing ---------------------------------------------------------------

namespace {

bool ends_token(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '`' || c == '\'' || c == '"' ||
         c == '<' || c == '>' || c == '(' || c == ')' || c == '[' || c == ']' || c == ',';
}

// [open, close) byte ranges between matched backtick runs.
std::vector<std::pair<std::size_t, std::size_t>> backtick_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t pos = 0; pos < text.size();) {
    if (text[pos] != '`') {
      ++pos;
      continue;
    }
    const auto start = pos;
    while (pos < text.size() && text[pos] == '`') ++pos;
    runs.emplace_back(start, pos);
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
    spans.emplace_back(runs[i].second, runs[i + 1].first);
  }
  return spans;
}

std::string_view first_nonblank_line(std::string_view text) {
  for (std::size_t start = 0; start <= text.size();) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) return line;
    start = end + 1;
  }
  return {};
}

bool is_unknown_label(std::string_view item) {
  while (!item.empty() && (item.front() == '`' || item.front() == '\'' || item.front() == '"')) {
    item.remove_prefix(1);
  }
  while (!item.empty() && (item.back() == '`' || item.back() == '\'' || item.back() == '"' ||
                           item.back() == '.')) {
    item.remove_suffix(1);
  }
  return iequals_ascii(trim(item), kUnknownLabel);
}

}  // namespace

std::string parse_table_class(std::string_view response) {
  std::size_t best = std::string_view::npos;
  std::size_t prefix_len = 0;
  for (const std::string_view prefix :
       {std::string_view("https://dbpedia.org/ontology/"), std::string_view("http://dbpedia.org/ontology/")}) {
    for (auto pos = response.find(prefix); pos != std::string_view::npos;
         pos = response.find(prefix, pos + 1)) {
      auto end = pos + prefix.size();
      while (end < response.size() && !ends_token(response[end])) ++end;
      if (end > pos + prefix.size()) {
        if (pos < best) {
          best = pos;
          prefix_len = end - pos;
        }
        break;
      }
    }
  }
  if (best != std::string_view::npos) return std::string(response.substr(best, prefix_len));

  for (const auto& [open, close] : backtick_spans(response)) {
    const auto token = trim(response.substr(open, close - open));
    if (!token.empty()) return std::string(token);
  }
  throw ViolationError(unparsable(response, "no ontology IRI or backtick-quoted label"));
}

std::vector<std::string> split_column_list(std::string_view response) {
  std::string_view list;
  for (const auto& [open, close] : backtick_spans(response)) {
    const auto line = first_nonblank_line(response.substr(open, close - open));
    if (!line.empty()) {
      list = line;
      break;
    }
  }
  if (list.empty()) list = first_nonblank_line(response);
  if (list.empty()) throw ViolationError(unparsable(response, "no comma-separated list"));

  std::vector<std::string> items;
  for (const auto& piece : split(list, ',')) {
    const auto item = trim(piece);
    items.push_back(is_unknown_label(item) ? std::string(kUnknownLabel) : std::string(item));
  }
  if (std::all_of(items.begin(), items.end(), [](const auto& s) { return s.empty(); })) {
    throw ViolationError(unparsable(response, "empty list"));
  }
  return items;
}

std::vector<std::string> parse_column_types(std::string_view response, std::size_t columns) {
  auto items = split_column_list(response);
  if (items.size() != columns) {
    throw ViolationError(Violation{ViolationKind::ArityMismatch, join(items, ", "), std::nullopt,
                                   "got " + std::to_string(items.size()) + " labels for " +
                                       std::to_string(columns) + " columns"});
  }
  return items;
}

namespace {

// Recursive-descent reader for the argument tail of a pd.merge call.
class MergeArgsParser {
 public:
  explicit MergeArgsParser(std::string_view text) : text_(text) {}

  JoinPrediction parse() {
    std::optional<std::vector<std::string>> left, right, on;
    skip_ws();
    const auto call = text_.find("pd.merge(");
    if (call != std::string_view::npos && peek() != '\'' && peek() != '"' && peek() != '[') {
      // Full call echoed back: skip the two dataframe arguments.
      pos_ = call + std::string_view("pd.merge(").size();
    } else if (starts_with_keyword()) {
      // The model dropped the left_on value and went straight to keywords.
    } else {
      left = value();  // completion of "left_on="
      if (!eat(',')) return finish(left, right, on);
    }
    for (;;) {
      skip_ws();
      if (at_end() || peek() == ')') break;
      const auto arg_start = pos_;
      const auto name = identifier();
      skip_ws();
      if (!eat('=')) {
        if (name.empty()) fail(arg_start, "expected an argument");
        // Positional dataframe name.
      } else if (name == "left_on") {
        left = value_at(arg_start);
      } else if (name == "right_on") {
        right = value_at(arg_start);
      } else if (name == "on") {
        on = value_at(arg_start);
      } else {
        skip_value(arg_start);
      }
      if (!eat(',')) break;
    }
    return finish(left, right, on);
  }

 private:
  JoinPrediction finish(const std::optional<std::vector<std::string>>& left,
                        const std::optional<std::vector<std::string>>& right,
                        const std::optional<std::vector<std::string>>& on) {
    skip_ws();
    const auto tail_start = pos_;
    eat(')');
    // Closing fences and punctuation may follow on the same line; anything
    // else must start on a new line.
    while (!at_end() && (peek() == '`' || peek() == ';' || peek() == '.' || peek() == ' ' ||
                         peek() == '\t')) {
      ++pos_;
    }
    if (!at_end() && peek() != '\n' && peek() != '\r') fail(tail_start, "unexpected trailing text");
    if (on && !left && !right) return JoinPrediction{*on, *on};
    if (left && right) return JoinPrediction{*left, *right};
    if (left && on) return JoinPrediction{*left, *on};
    fail(tail_start, left ? "missing right_on" : "missing left_on");
  }

  std::vector<std::string> value_at(std::size_t arg_start) {
    skip_ws();
    if (at_end()) fail(arg_start, "dangling argument");
    return value();
  }

  std::vector<std::string> value() {
    skip_ws();
    if (eat('[')) {
      std::vector<std::string> items;
      skip_ws();
      if (eat(']')) return items;
      for (;;) {
        items.push_back(quoted());
        skip_ws();
        if (eat(']')) return items;
        if (!eat(',')) fail(pos_, "expected ',' or ']'");
        skip_ws();
        if (eat(']')) return items;
      }
    }
    return {quoted()};
  }

  std::string quoted() {
    skip_ws();
    const auto start = pos_;
    if (at_end() || (peek() != '\'' && peek() != '"')) fail(start, "expected a quoted column name");
    const char quote = text_[pos_++];
    std::string out;
    while (!at_end()) {
      const char c = text_[pos_++];
      if (c == quote) return out;
      if (c == '\\' && !at_end()) {
        out += text_[pos_++];
        continue;
      }
      out += c;
    }
    fail(start, "unterminated string");
  }

  // Values of keyword arguments we do not interpret (how='inner', ...).
  void skip_value(std::size_t arg_start) {
    skip_ws();
    if (at_end()) fail(arg_start, "dangling argument");
    if (peek() == '\'' || peek() == '"' || peek() == '[') {
      value();
      return;
    }
    const auto start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                         peek() == '.' || peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail(arg_start, "unsupported argument value");
  }

  bool starts_with_keyword() {
    const auto start = pos_;
    const bool keyword = !identifier().empty() && eat('=');
    pos_ = start;
    return keyword;
  }

  std::string identifier() {
    const auto start = pos_;
    while (!at_end() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail(std::size_t at, const std::string& why) const {
    throw ViolationError(unparsable(text_.substr(std::min(at, text_.size())), why));
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() const { return text_[pos_]; }
  bool at_end() const { return pos_ >= text_.size(); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string quote_name(const std::string& name) {
  std::string out = "'";
  for (const char c : name) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string format_side(const std::vector<std::string>& names) {
  if (names.size() == 1) return quote_name(names.front());
  std::vector<std::string> quoted;
  for (const auto& name : names) quoted.push_back(quote_name(name));
  return "[" + join(quoted, ", ") + "]";
}

}  // namespace

JoinPrediction parse_join_completion(std::string_view response) {
  auto text = trim(response);
  while (!text.empty() && text.front() == '`') text.remove_prefix(1);
  return MergeArgsParser(text).parse();
}

std::string format_join_completion(const JoinPrediction& prediction) {
  return format_side(prediction.left_cols) + ", right_on=" + format_side(prediction.right_cols) +
         ")";
}

// --- constraint checks -----------------------------------------------------

std::optional<Violation> check(const ClassCandidate& candidate, const Ontology& ontology) {
  std::string label;
  try {
    label = normalize_label(candidate.label, ontology);
  } catch (const Error&) {
    return Violation{ViolationKind::UnknownClass, candidate.label, std::nullopt, "empty label"};
  }
  if (lookup(ontology, TermKind::Class, label)) return std::nullopt;
  return Violation{ViolationKind::UnknownClass, label, std::nullopt, "not an ontology class"};
}

std::optional<Violation> check(const ColumnCandidates& candidates, const Ontology& ontology) {
  for (std::size_t i = 0; i < candidates.labels.size(); ++i) {
    const auto& raw = candidates.labels[i];
    if (is_unknown_label(raw)) continue;
    std::string label;
    try {
      label = normalize_label(raw, ontology);
    } catch (const Error&) {
      return Violation{ViolationKind::UnknownProperty, raw, i, "empty label"};
    }
    if (!lookup(ontology, TermKind::Property, label)) {
      return Violation{ViolationKind::UnknownProperty, raw, i, "not an ontology property"};
    }
  }
  return std::nullopt;
}

std::optional<Violation> check(const JoinPrediction& prediction, const Table& left,
                               const Table& right) {
  if (prediction.left_cols.empty() || prediction.left_cols.size() != prediction.right_cols.size()) {
    return Violation{ViolationKind::ArityMismatch,
                     format_join_completion(prediction), std::nullopt,
                     std::to_string(prediction.left_cols.size()) + " left vs " +
                         std::to_string(prediction.right_cols.size()) + " right columns"};
  }
  const auto check_side = [](const std::vector<std::string>& names, const Table& table,
                             const char* side) -> std::optional<Violation> {
    const auto& headers = table.headers();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!headers || std::find(headers->begin(), headers->end(), names[i]) == headers->end()) {
        return Violation{ViolationKind::NonexistentColumn, names[i], i,
                         std::string("no such column in ") + side};
      }
    }
    return std::nullopt;
  };
  if (auto v = check_side(prediction.left_cols, left, "df1")) return v;
  return check_side(prediction.right_cols, right, "df2");
}

// --- anchoring -------------------------------------------------------------

Conversation anchor(const Conversation& conversation, std::string replacement) {
  if (conversation.empty() || conversation.back().role != Role::Assistant) {
    throw Error(ErrorCode::InvalidState, "anchoring needs a final assistant turn");
  }
  return conversation.with_last_text(std::move(replacement));
}

std::string render_column_list(const std::vector<std::string>& labels) {
  return "`" + join(labels, ", ") + "`";
}

namespace {

std::string normalized_or_raw(std::string_view raw, const Ontology& ontology) {
  try {
    return normalize_label(raw, ontology);
  } catch (const Error&) {
    return std::string(trim(raw));
  }
}

// Writes `term` the way `original` was written: short prefix, IRI or bare.
std::string in_notation_of(std::string_view original, const OntologyTerm& term,
                           const Ontology& ontology) {
  auto stripped = trim(original);
  while (!stripped.empty() && (stripped.front() == '`' || stripped.front() == '\'' ||
                               stripped.front() == '"')) {
    stripped.remove_prefix(1);
  }
  for (const auto& [short_prefix, iri_prefix] : ontology.namespace_prefixes()) {
    if (stripped.size() >= short_prefix.size() &&
        iequals_ascii(stripped.substr(0, short_prefix.size()), short_prefix)) {
      return short_prefix + term.local_name;
    }
  }
  if (stripped.starts_with("http://") || stripped.starts_with("https://")) return term.iri;
  return term.local_name;
}

ColumnCandidates repair_candidates(const Violation& violation, const Ontology& ontology,
                                   const ColumnCandidates& original, const Similarity& similarity) {
  if (violation.kind != ViolationKind::UnknownProperty || !violation.position ||
      *violation.position >= original.labels.size()) {
    throw Error(ErrorCode::RepairUnavailable,
                std::string("cannot repair ") + to_string(violation.kind) + " in a column list");
  }
  auto repaired = original;
  auto& item = repaired.labels[*violation.position];
  const auto nearest =
      nearest_term(ontology, TermKind::Property, normalized_or_raw(item, ontology), similarity);
  item = in_notation_of(item, nearest.term, ontology);
  return repaired;
}

}  // namespace

std::string repair_text(const Violation& violation, const Ontology& ontology,
                        const ClassCandidate& original, const Similarity& similarity) {
  if (violation.kind != ViolationKind::UnknownClass) {
    throw Error(ErrorCode::RepairUnavailable,
                std::string("cannot repair ") + to_string(violation.kind) + " as a class");
  }
  return nearest_term(ontology, TermKind::Class, normalized_or_raw(original.label, ontology),
                      similarity)
      .term.iri;
}

std::string repair_text(const Violation& violation, const Ontology& ontology,
                        const ColumnCandidates& original, const Similarity& similarity) {
  return render_column_list(repair_candidates(violation, ontology, original, similarity).labels);
}

// --- pipelines -------------------------------------------------------------

namespace {

constexpr const char* kEmptyResponse = "(no answer)";

std::string as_turn_text(const std::string& response) {
  return trim(response).empty() ? std::string(kEmptyResponse) : response;
}

// A bare single-token answer, used when no pattern matched.
std::optional<std::string> best_effort_label(std::string_view response) {
  const auto text = trim(response);
  if (text.empty()) return std::nullopt;
  if (std::any_of(text.begin(), text.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; })) {
    return std::nullopt;
  }
  return std::string(text);
}

Completion ask(ChatBackend& backend, const Conversation& conversation,
               const PipelineConfig& config, Usage& usage) {
  auto completion = backend.complete(conversation, config.params);
  usage += completion.usage;
  return completion;
}

// Replaces the task's first answer with `text`, dropping any clarification
// exchange that followed it.
Conversation anchored_history(const Conversation& working, std::size_t first_answer_end,
                              std::string text) {
  return anchor(working.prefix(first_answer_end), std::move(text));
}

}  // namespace

TableClassResult run_table_class_task(const Table& table, const Ontology& ontology,
                                      ChatBackend& backend, const PipelineConfig& config,
                                      Conversation& conversation, Usage& usage) {
  config.validate();
  conversation.append(Role::User,
                      assemble(table_class_prompt(table, config.allowed_classes, config.prompt)));
  const std::size_t first_answer_end = conversation.size() + 1;

  Conversation working = conversation;
  TableClassResult result;
  bool reasked = false;
  bool guessed = false;
  std::string candidate;
  for (;;) {
    ++result.attempts;
    const auto completion = ask(backend, working, config, usage);
    result.raw_response = completion.text;
    working.append(Role::Assistant, as_turn_text(completion.text));
    try {
      candidate = parse_table_class(completion.text);
      break;
    } catch (const ViolationError& e) {
      if (config.anchoring_enabled && !reasked && result.attempts < config.max_anchor_attempts) {
        reasked = true;
        working.append(Role::User, kClarifyLabel);
        continue;
      }
      auto fallback = best_effort_label(completion.text);
      if (!fallback) throw TaskFailed(e.violation());
      candidate = std::move(*fallback);
      guessed = true;
      break;
    }
  }

  const auto violation = check(ClassCandidate{candidate}, ontology);
  if (!violation) {
    result.term = *lookup(ontology, TermKind::Class, normalize_label(candidate, ontology));
  } else if (config.anchoring_enabled) {
    result.term = *lookup(ontology, TermKind::Class,
                          normalize_label(repair_text(*violation, ontology,
                                                      ClassCandidate{candidate},
                                                      config.similarity),
                                          ontology));
  } else {
    // Nearest-neighbour post-processing only; history keeps the bad answer.
    result.term = nearest_term(ontology, TermKind::Class,
                               normalized_or_raw(candidate, ontology), config.similarity)
                      .term;
  }

  const bool clean_first_try = !violation && !reasked && !guessed;
  if (config.anchoring_enabled && !clean_first_try) {
    result.anchored = true;
    conversation = anchored_history(working, first_answer_end, result.term.iri);
  } else {
    conversation = std::move(working);
  }
  return result;
}

ColumnTypeResult run_column_type_task(const Table& table, const Ontology& ontology,
                                      ChatBackend& backend, const PipelineConfig& config,
                                      Conversation& conversation, Usage& usage) {
  config.validate();
  conversation.append(Role::User, assemble(column_type_prompt(table, config.prompt)));
  const std::size_t first_answer_end = conversation.size() + 1;
  const std::size_t columns = table.arity();

  Conversation working = conversation;
  ColumnTypeResult result;
  bool reasked = false;
  ColumnCandidates candidates;
  for (;;) {
    ++result.attempts;
    const auto completion = ask(backend, working, config, usage);
    result.raw_response = completion.text;
    working.append(Role::Assistant, as_turn_text(completion.text));
    try {
      candidates.labels = split_column_list(completion.text);
      break;
    } catch (const ViolationError& e) {
      if (config.anchoring_enabled && !reasked && result.attempts < config.max_anchor_attempts) {
        reasked = true;
        working.append(Role::User, kClarifyLabels);
        continue;
      }
      throw TaskFailed(e.violation());
    }
  }

  bool repaired = reasked;
  if (candidates.labels.size() != columns) {
    Violation mismatch{ViolationKind::ArityMismatch, join(candidates.labels, ", "), std::nullopt,
                       "got " + std::to_string(candidates.labels.size()) + " labels for " +
                           std::to_string(columns) + " columns"};
    if (!config.anchoring_enabled) throw TaskFailed(std::move(mismatch));
    candidates.labels.resize(columns, kUnknownLabel);
    repaired = true;
  }
  // Each pass fixes the first failing column, so this ends within `columns`
  // passes.
  while (const auto violation = check(candidates, ontology)) {
    candidates = repair_candidates(*violation, ontology, candidates, config.similarity);
    repaired = true;
  }

  for (const auto& label : candidates.labels) {
    if (label == kUnknownLabel) {
      result.assignments.emplace_back(std::nullopt);
    } else {
      result.assignments.push_back(
          *lookup(ontology, TermKind::Property, normalize_label(label, ontology)));
    }
  }

  if (config.anchoring_enabled && repaired) {
    result.anchored = true;
    conversation =
        anchored_history(working, first_answer_end, render_column_list(candidates.labels));
  } else {
    conversation = std::move(working);
  }
  return result;
}

TablePipelineResult run_table_pipeline(const Table& table, const Ontology& ontology,
                                       ChatBackend& backend, const PipelineConfig& config) {
  TablePipelineResult out;
  Conversation first;
  out.table_class = run_table_class_task(table, ontology, backend, config, first, out.usage);
  if (config.context_flow) {
    out.column_types = run_column_type_task(table, ontology, backend, config, first, out.usage);
    out.conversations.push_back(std::move(first));
  } else {
    Conversation second;
    out.column_types = run_column_type_task(table, ontology, backend, config, second, out.usage);
    out.conversations.push_back(std::move(first));
    out.conversations.push_back(std::move(second));
  }
  return out;
}

namespace {

// Maps each predicted name to the header it denotes: the exact header, or
// the only header equal to it ignoring ASCII case. Unmatched names pass
// through for check() to report.
std::vector<std::string> resolve_names(const std::vector<std::string>& names, const Table& table) {
  std::vector<std::string> out;
  const auto& headers = *table.headers();
  for (const auto& name : names) {
    if (std::find(headers.begin(), headers.end(), name) != headers.end()) {
      out.push_back(name);
      continue;
    }
    const auto matches = std::count_if(headers.begin(), headers.end(),
                                       [&](const auto& h) { return iequals_ascii(h, name); });
    if (matches == 1) {
      out.push_back(*std::find_if(headers.begin(), headers.end(),
                                  [&](const auto& h) { return iequals_ascii(h, name); }));
    } else {
      out.push_back(name);
    }
  }
  return out;
}

std::string join_feedback(const Violation& violation, const Table& left, const Table& right,
                          const PipelineConfig& config) {
  std::string text;
  switch (violation.kind) {
    case ViolationKind::NonexistentColumn: {
      const bool in_left = violation.detail.ends_with("df1");
      const auto& table = in_left ? left : right;
      text = "Column '" + violation.offending_text + "' does not exist in " +
             (in_left ? "df1" : "df2") + ". Its columns are: " + join(*table.headers(), ", ") +
             ".";
      break;
    }
    case ViolationKind::ArityMismatch:
      text = "left_on and right_on must name the same, nonzero number of columns.";
      break;
    default:
      text = "The answer could not be read as pd.merge arguments.";
      break;
  }
  if (config.prompt.include_prefix) {
    text += "\n\n";
    text += prompt_text::kJoinPrefix;
  }
  return text;
}

}  // namespace

JoinResult run_join_task(const Table& left, const Table& right, ChatBackend& backend,
                         const PipelineConfig& config,
                         const std::optional<std::string>& context_notes) {
  if (!left.has_headers() || !right.has_headers()) {
    throw Error(ErrorCode::Precondition, "join prediction needs headers on both tables");
  }
  config.validate();
  JoinResult result;
  result.conversation.append(
      Role::User, assemble(join_prompt(left, right, config.prompt,
                                       config.context_flow ? context_notes : std::nullopt)));
  for (;;) {
    ++result.attempts;
    const auto completion = ask(backend, result.conversation, config, result.usage);
    result.raw_response = completion.text;
    result.conversation.append(Role::Assistant, as_turn_text(completion.text));

    std::optional<Violation> violation;
    try {
      auto prediction = parse_join_completion(completion.text);
      prediction.left_cols = resolve_names(prediction.left_cols, left);
      prediction.right_cols = resolve_names(prediction.right_cols, right);
      violation = check(prediction, left, right);
      if (!violation) {
        result.prediction = std::move(prediction);
        result.anchored = result.attempts > 1;
        return result;
      }
    } catch (const ViolationError& e) {
      violation = e.violation();
    }
    if (!config.anchoring_enabled || result.attempts >= config.max_anchor_attempts) {
      throw TaskFailed(*violation);
    }
    result.conversation.append(Role::User, join_feedback(*violation, left, right, config));
  }
}

}  // namespace discovery
