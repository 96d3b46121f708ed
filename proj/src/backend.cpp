#include "discovery/backend.hpp"

#include <cctype>
#include <cmath>
#include <json.hpp>

#include "discovery/error.hpp"
#include "discovery/text.hpp"

namespace discovery {

const char* to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void Conversation::append(Role role, std::string text) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "turn text must be nonempty");
  if (role == Role::System) {
    if (!turns_.empty()) {
      throw Error(ErrorCode::InvalidState, "a system turn may only open the conversation");
    }
  } else {
    const bool awaiting_user = turns_.empty() || turns_.back().role != Role::User;
    const Role expected = awaiting_user ? Role::User : Role::Assistant;
    if (role != expected) {
      throw Error(ErrorCode::InvalidState, std::string("expected a ") + to_string(expected) +
                                               " turn, got " + to_string(role));
    }
  }
  turns_.push_back(Turn{role, std::move(text)});
}

const Turn& Conversation::back() const {
  if (turns_.empty()) throw Error(ErrorCode::InvalidState, "conversation is empty");
  return turns_.back();
}

Conversation Conversation::with_last_text(std::string text) const {
  if (turns_.empty()) throw Error(ErrorCode::InvalidState, "conversation is empty");
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "turn text must be nonempty");
  Conversation copy = *this;
  copy.turns_.back().text = std::move(text);
  return copy;
}

Conversation Conversation::prefix(std::size_t count) const {
  Conversation copy;
  copy.turns_.assign(turns_.begin(),
                     turns_.begin() + static_cast<std::ptrdiff_t>(std::min(count, turns_.size())));
  return copy;
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "temperature must lie in [0, 1], got " + std::to_string(temperature));
  }
  if (max_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
}

Money Money::from_dollars(double dollars) {
  return Money{static_cast<std::int64_t>(std::llround(dollars * 1e9))};
}

Money PriceTable::cost(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) const {
  return Money::from_dollars(static_cast<double>(prompt_tokens) * input_per_1k / 1000.0) +
         Money::from_dollars(static_cast<double>(completion_tokens) * output_per_1k / 1000.0);
}

Usage& Usage::operator+=(const Usage& other) {
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  wall_time += other.wall_time;
  cost += other.cost;
  estimated = estimated || other.estimated;
  return *this;
}

std::uint64_t count_words(std::string_view text) {
  std::uint64_t words = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::vector<ScriptEntry> parse_transcript(std::string_view source) {
  std::vector<ScriptEntry> entries;
  std::size_t line_number = 0;
  for (const auto& line : split(source, '\n')) {
    ++line_number;
    if (trim(line).empty()) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedTranscript, std::string("invalid JSON: ") + e.what(),
                  line_number);
    }
    if (!object.is_object()) {
      throw Error(ErrorCode::MalformedTranscript, "expected a JSON object", line_number);
    }
    const auto response = object.find("response");
    if (response == object.end() || !response->is_string()) {
      throw Error(ErrorCode::MalformedTranscript, "missing string field \"response\"",
                  line_number);
    }
    ScriptEntry entry;
    entry.response = response->get<std::string>();
    if (const auto match = object.find("match"); match != object.end() && !match->is_null()) {
      if (!match->is_string()) {
        throw Error(ErrorCode::MalformedTranscript, "\"match\" must be a string", line_number);
      }
      entry.match = match->get<std::string>();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, PriceTable prices,
                                 std::chrono::nanoseconds latency)
    : entries_(std::move(entries)), prices_(prices), latency_(latency) {}

Completion ScriptedBackend::complete(const Conversation& conversation,
                                     const GenerationParams& params) {
  params.validate();
  if (conversation.empty() || conversation.back().role != Role::User) {
    throw Error(ErrorCode::InvalidState, "conversation must end with a user turn");
  }
  std::lock_guard lock(mutex_);
  if (next_ >= entries_.size()) {
    throw Error(ErrorCode::BackendExhausted,
                "transcript exhausted after " + std::to_string(entries_.size()) + " responses");
  }
  const auto& entry = entries_[next_];
  if (entry.match && conversation.back().text.find(*entry.match) == std::string::npos) {
    throw Error(ErrorCode::MatchFailed, "transcript entry " + std::to_string(next_ + 1) +
                                            " expects the prompt to contain \"" + *entry.match +
                                            "\"");
  }
  ++next_;

  Completion out;
  out.text = entry.response;
  for (const auto& turn : conversation.turns()) out.usage.prompt_tokens += count_words(turn.text);
  out.usage.completion_tokens = count_words(entry.response);
  out.usage.wall_time = latency_;
  out.usage.cost = prices_.cost(out.usage.prompt_tokens, out.usage.completion_tokens);
  out.usage.estimated = true;
  return out;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - next_;
}

ScriptedBackend load_transcript(std::string_view source, PriceTable prices) {
  return ScriptedBackend(parse_transcript(source), prices);
}

void UsageMeter::add(const Usage& usage) {
  std::lock_guard lock(mutex_);
  total_ += usage;
  ++items_;
}

MeterReport UsageMeter::report() const {
  std::lock_guard lock(mutex_);
  MeterReport out;
  out.total_cost = total_.cost;
  out.items = items_;
  out.prompt_tokens = total_.prompt_tokens;
  out.completion_tokens = total_.completion_tokens;
  out.wall_time = total_.wall_time;
  out.estimated = total_.estimated;
  const double seconds = std::chrono::duration<double>(total_.wall_time).count();
  out.items_per_second = seconds > 0.0 ? static_cast<double>(items_) / seconds : 0.0;
  return out;
}

}  // namespace discovery
