#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mwforge {

enum class ErrorCode {
  // dds_core
  FrequencyOutOfRange,
  AmplitudeOutOfRange,
  CapacityExceeded,
  GridViolation,
  UnvalidatedSchedule,
  // pulse_compiler
  SyntaxError,
  SemanticError,
  ProfileOverflow,
  // rf_chain
  InsufficientLength,
  // noise_model
  NonMonotonicFrequency,
  EmptyTable,
  RangeOutsideTable,
  DisjointRanges,
  NyquistViolation,
  // atom_sim
  StepTooLarge,
  UndefinedMixingAngle,
  MissingCalibration,
  // generic
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for the command-line tool:
/// 0 ok, 1 parse, 2 semantic, 3 capacity, 4 numeric/range, 5 I/O.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Diagnostic {
  ErrorCode code;
  int line = 0;
  int column = 0;
  std::string message;

  std::string format() const;
};

/// Thrown by the pulse-language front end; carries every diagnostic found.
class CompileError : public Error {
 public:
  explicit CompileError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace mwforge
