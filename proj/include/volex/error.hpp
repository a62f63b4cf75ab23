#pragma once

#include <stdexcept>
#include <string>

namespace volex {

enum class ErrorCode {
  kIo,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kNonFinite,
  kIndexOutOfRange,
  kEmptyMesh,
  kOutOfRange,
  kShapeMismatch,
  kInvalidArgument,
  kEmptyVolume,
  kChannelMismatch,
  kEmptyDictionary,
  kZeroSeparation,
  kParse,
};

const char* error_code_name(ErrorCode code);

// All domain failures surface as volex::Error. The message is a single line
// so the CLI can print it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace volex
