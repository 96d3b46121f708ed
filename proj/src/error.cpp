#include "discovery/error.hpp"

namespace discovery {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MalformedIri: return "MalformedIri";
    case ErrorCode::DuplicateTerm: return "DuplicateTerm";
    case ErrorCode::EmptyLabel: return "EmptyLabel";
    case ErrorCode::EmptyOntologyKind: return "EmptyOntologyKind";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::PromptBudgetExceeded: return "PromptBudgetExceeded";
    case ErrorCode::BackendExhausted: return "BackendExhausted";
    case ErrorCode::MatchFailed: return "MatchFailed";
    case ErrorCode::MalformedTranscript: return "MalformedTranscript";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::RepairUnavailable: return "RepairUnavailable";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::Unparsable: return "Unparsable";
    case ErrorCode::TaskFailed: return "TaskFailed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyStats: return "EmptyStats";
    case ErrorCode::MissingHeaders: return "MissingHeaders";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::UnsupportedTask: return "UnsupportedTask";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out = to_string(code);
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace discovery
