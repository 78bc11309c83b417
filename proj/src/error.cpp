#include "gazealign/error.hpp"

namespace gazealign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OrderError: return "OrderError";
    case ErrorCode::EmptyScanpath: return "EmptyScanpath";
    case ErrorCode::UnknownStimulus: return "UnknownStimulus";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BadPatchSize: return "BadPatchSize";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::MixedDim: return "MixedDim";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TooFewScanpaths: return "TooFewScanpaths";
    case ErrorCode::NoSharedStimuli: return "NoSharedStimuli";
    case ErrorCode::BadMatrix: return "BadMatrix";
    case ErrorCode::DegenerateClustering: return "DegenerateClustering";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return ErrorKind::Config;
    case ErrorCode::IoError:
    case ErrorCode::Internal: return ErrorKind::Internal;
    default: return ErrorKind::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace gazealign
