#include "mathemb/error.hpp"

namespace mathemb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::UnterminatedCommand: return "UnterminatedCommand";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicatePageId: return "DuplicatePageId";
    case ErrorCode::DuplicateQueryId: return "DuplicateQueryId";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownTokensOnly: return "UnknownTokensOnly";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnknownSurface: return "UnknownSurface";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::NoQueryFormulae: return "NoQueryFormulae";
    case ErrorCode::UnknownPage: return "UnknownPage";
    case ErrorCode::NegativeAlpha: return "NegativeAlpha";
    case ErrorCode::MalformedRunLine: return "MalformedRunLine";
    case ErrorCode::MalformedQrelLine: return "MalformedQrelLine";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadFormat: return "BadFormat";
  }
  return "Unknown";
}

}  // namespace mathemb
