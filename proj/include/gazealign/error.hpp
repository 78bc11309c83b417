#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazealign {

enum class ErrorCode {
  // data errors
  MissingFile,
  DuplicateKey,
  ParseError,
  OrderError,
  EmptyScanpath,
  UnknownStimulus,
  OutOfBounds,
  BadPatchSize,
  MissingEmbedding,
  HeaderMismatch,
  CorruptFile,
  MixedDim,
  DimMismatch,
  ZeroVector,
  TooFewScanpaths,
  NoSharedStimuli,
  BadMatrix,
  DegenerateClustering,
  TooFewCandidates,
  DegenerateMarginals,
  // configuration errors
  ConfigError,
  // environment / internal
  IoError,
  Internal,
};

enum class ErrorKind { Config, Data, Internal };

std::string_view to_string(ErrorCode code);
ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace gazealign
