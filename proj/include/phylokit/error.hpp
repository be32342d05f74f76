#pragma once

#include <stdexcept>
#include <string>

namespace phylokit {

// Mirrors pk_status in phylokit.h; values must stay in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,  // input error: dimension mismatch, bad ids, bad JSON values
  kParamDomain = 2,      // transform or setting outside its admissible range
  kDegenerateInput = 3,  // empty or too-small image
  kNumerical = 4,        // singular system, non-finite values
  kInsufficientData = 5,
  kInvalidShape = 6,     // tree shape with several roots or a cycle
  kTraining = 7,         // too many failed pair fits
  kUndefined = 8,        // quantity undefined for the given input
  kIo = 9,
  kSchema = 10,          // JSON input does not match the expected layout
  kInternal = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace phylokit
