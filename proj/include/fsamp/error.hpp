#pragma once

#include <stdexcept>
#include <string>

namespace fsamp {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotOnManifold,
  kNotTangent,
  kCutLocus,
  kSingular,
  kDivergence,
  kEmptyInput,
  kConfig,
  kCheckpoint,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fsamp
