#include "shapeboost/error.hpp"

namespace shapeboost {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter:
      return "invalid-parameter";
    case ErrorCode::kInvalidInput:
      return "invalid-input";
    case ErrorCode::kInvalidModel:
      return "invalid-model";
    case ErrorCode::kEmptyModel:
      return "empty-model";
    case ErrorCode::kParseError:
      return "parse-error";
    case ErrorCode::kUnsupportedMulticlass:
      return "unsupported-multiclass";
    case ErrorCode::kUnsupported:
      return "unsupported";
    case ErrorCode::kInternal:
      return "internal-error";
  }
  return "unknown-error";
}

}  // namespace shapeboost
