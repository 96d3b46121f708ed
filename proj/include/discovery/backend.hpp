#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace discovery {

enum class Role { System, User, Assistant };

const char* to_string(Role role);

struct Turn {
  Role role = Role::User;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

// Chat history. Roles alternate User/Assistant after an optional leading
// System turn, starting with User; `append` rejects anything else.
class Conversation {
 public:
  Conversation() = default;

  void append(Role role, std::string text);

  const std::vector<Turn>& turns() const noexcept { return turns_; }
  std::size_t size() const noexcept { return turns_.size(); }
  bool empty() const noexcept { return turns_.empty(); }
  const Turn& back() const;

  /// Copy whose final turn carries `text` instead.
  Conversation with_last_text(std::string text) const;

  /// Copy holding only the first `count` turns.
  Conversation prefix(std::size_t count) const;

  friend bool operator==(const Conversation&, const Conversation&) = default;

 private:
  std::vector<Turn> turns_;
};

struct GenerationParams {
  double temperature = 0.0;
  int max_tokens = 256;

  // Throws InvalidArgument outside temperature [0, 1] or max_tokens < 1.
  void validate() const;
};

// Currency in integer nano-dollars so that sums are exact and independent
// of accumulation order.
struct Money {
  std::int64_t nanos = 0;

  static Money from_dollars(double dollars);
  double dollars() const { return static_cast<double>(nanos) / 1e9; }
  double cents() const { return static_cast<double>(nanos) / 1e7; }

  Money& operator+=(Money other) {
    nanos += other.nanos;
    return *this;
  }
  friend Money operator+(Money a, Money b) { return a += b; }
  friend auto operator<=>(const Money&, const Money&) = default;
};

// Dollars per 1000 tokens.
struct PriceTable {
  double input_per_1k = 0.0015;
  double output_per_1k = 0.002;

  Money cost(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) const;
};

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::chrono::nanoseconds wall_time{0};
  Money cost;
  // Token counts are a whitespace proxy rather than tokenizer output.
  bool estimated = false;

  Usage& operator+=(const Usage& other);
  friend bool operator==(const Usage&, const Usage&) = default;
};

struct Completion {
  std::string text;
  Usage usage;
};

// A chat-completion model. Implementations accept concurrent calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// `conversation` must end with a User turn. The caller appends the
  /// returned text as the Assistant turn.
  virtual Completion complete(const Conversation& conversation,
                              const GenerationParams& params) = 0;

  /// True when responses depend on call order (replayed transcripts), so
  /// callers must not reorder calls across workers.
  virtual bool ordered_replay() const { return false; }
};

struct ScriptEntry {
  std::optional<std::string> match;  // required substring of the final User turn
  std::string response;
};

/// JSON-lines, one {"match"?: string, "response": string} per line. Blank
/// lines are skipped. Throws MalformedTranscript with the line number.
std::vector<ScriptEntry> parse_transcript(std::string_view source);

// Replays a transcript in order. Usage counts whitespace-separated words and
// reports a fixed simulated latency per call, so it is fully deterministic.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries, PriceTable prices = {},
                           std::chrono::nanoseconds latency = std::chrono::milliseconds(20));

  Completion complete(const Conversation& conversation, const GenerationParams& params) override;
  bool ordered_replay() const override { return true; }

  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptEntry> entries_;
  std::size_t next_ = 0;
  PriceTable prices_;
  std::chrono::nanoseconds latency_;
};

ScriptedBackend load_transcript(std::string_view source, PriceTable prices = {});

std::uint64_t count_words(std::string_view text);

struct MeterReport {
  Money total_cost;
  std::size_t items = 0;
  double items_per_second = 0.0;  // 0 when no wall time has been recorded
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::chrono::nanoseconds wall_time{0};
  bool estimated = false;
};

// Thread-safe running totals; every `add` counts as one item.
class UsageMeter {
 public:
  void add(const Usage& usage);
  MeterReport report() const;

 private:
  mutable std::mutex mutex_;
  Usage total_;
  std::size_t items_ = 0;
};

}  // namespace discovery
