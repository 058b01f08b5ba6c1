#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace analogy {

enum class ErrorCode {
  // alphabet
  UnknownGlyph,
  LastGlyph,
  FirstGlyph,
  InvalidN,
  PoolTooSmall,
  InvalidAlphabet,
  // letterstring
  PreconditionViolated,
  AlphabetOverflow,
  Infeasible,
  ConfigInvalid,
  // matrix
  RuleConflict,
  Inconsistent,
  ProgressionUnsupported,
  MalformedGrid,
  // story
  MissingField,
  WrongCount,
  // harness
  MissingSlot,
  TransportError,
  CacheCorrupt,
  // report
  InvalidCounts,
  UnknownTag,
  EmptyInput,
  IoError,
  // studysvc
  SuiteExhausted,
  SessionComplete,
  UnknownSession,
  OutOfOrder,
  SessionIncomplete,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace analogy
