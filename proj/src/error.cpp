#include "mwforge/error.hpp"

namespace mwforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FrequencyOutOfRange: return "FrequencyOutOfRange";
    case ErrorCode::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::GridViolation: return "GridViolation";
    case ErrorCode::UnvalidatedSchedule: return "UnvalidatedSchedule";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::ProfileOverflow: return "ProfileOverflow";
    case ErrorCode::InsufficientLength: return "InsufficientLength";
    case ErrorCode::NonMonotonicFrequency: return "NonMonotonicFrequency";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::RangeOutsideTable: return "RangeOutsideTable";
    case ErrorCode::DisjointRanges: return "DisjointRanges";
    case ErrorCode::NyquistViolation: return "NyquistViolation";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::UndefinedMixingAngle: return "UndefinedMixingAngle";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError:
      return 1;
    case ErrorCode::SemanticError:
    case ErrorCode::GridViolation:
    case ErrorCode::UnvalidatedSchedule:
    case ErrorCode::MissingCalibration:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::CapacityExceeded:
    case ErrorCode::ProfileOverflow:
      return 3;
    case ErrorCode::Io:
      return 5;
    default:
      return 4;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

std::string Diagnostic::format() const {
  return std::to_string(line) + ":" + std::to_string(column) + ": " +
         std::string(to_string(code)) + ": " + message;
}

namespace {

ErrorCode dominant_code(const std::vector<Diagnostic>& diags) {
  // A syntax error anywhere makes the whole unit unparseable.
  for (const auto& d : diags) {
    if (d.code == ErrorCode::SyntaxError) return d.code;
  }
  return diags.empty() ? ErrorCode::SemanticError : diags.front().code;
}

std::string join(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += d.format();
  }
  return out;
}

}  // namespace

CompileError::CompileError(std::vector<Diagnostic> diagnostics)
    : Error(dominant_code(diagnostics), join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace mwforge
