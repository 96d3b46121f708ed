#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace discovery {

enum class ErrorCode {
  InvalidArgument,
  InvalidTable,
  MalformedCsv,
  MalformedIri,
  DuplicateTerm,
  EmptyLabel,
  EmptyOntologyKind,
  EmptyTable,
  PromptBudgetExceeded,
  BackendExhausted,
  MatchFailed,
  MalformedTranscript,
  TransportError,
  RateLimited,
  MalformedResponse,
  InvalidState,
  RepairUnavailable,
  Precondition,
  Unparsable,
  TaskFailed,
  LengthMismatch,
  EmptyStats,
  MissingHeaders,
  ManifestError,
  UnsupportedTask,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library. `line()` is set for errors that come
// from line-oriented inputs (ontology files, transcripts, manifests, CSV).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace discovery
