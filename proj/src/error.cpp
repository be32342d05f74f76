#include "phylokit/error.hpp"

namespace phylokit {

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kParamDomain: return "parameter out of domain";
    case ErrorCode::kDegenerateInput: return "degenerate input";
    case ErrorCode::kNumerical: return "numerical failure";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kInvalidShape: return "invalid tree shape";
    case ErrorCode::kTraining: return "training failed";
    case ErrorCode::kUndefined: return "undefined";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kSchema: return "schema mismatch";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

}  // namespace phylokit
