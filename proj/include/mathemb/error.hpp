#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mathemb {

enum class ErrorCode {
  // tokenizer
  InvalidEncoding,
  UnterminatedCommand,
  // corpus
  MalformedRecord,
  DuplicatePageId,
  DuplicateQueryId,
  EmptyVocabulary,
  // embeddings
  InvalidConfig,
  DimensionMismatch,
  EmptyContext,
  EmptyCorpus,
  UnknownTokensOnly,
  // analysis
  ZeroVector,
  UnknownSurface,
  InsufficientRows,
  // retrieval
  NoQueryFormulae,
  UnknownPage,
  NegativeAlpha,
  // evaluation
  MalformedRunLine,
  MalformedQrelLine,
  // persistence
  Io,
  BadFormat,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a diagnostic and an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mathemb
