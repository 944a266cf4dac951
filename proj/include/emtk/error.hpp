#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emtk {

// Every failure surfaced by the toolkit carries one of these codes. The CLI
// prints the code name verbatim, so names are part of the external contract.
enum class ErrorCode {
  // molgraph
  UnsupportedElement,
  SyntaxError,
  ValenceError,
  KekulizationError,
  // descriptors
  ZeroDenominator,
  UnknownBondType,
  MultiFragment,
  MissingDensity,
  UnexpectedDensity,
  // dataset
  UnknownChannel,
  ParseFailure,
  DuplicateRecord,
  NonPositiveForLog,
  TooFewMaterials,
  UnknownSubset,
  InvalidRegistry,
  // models
  InvalidConfig,
  DimensionMismatch,
  NonFiniteLoss,
  SchemaMismatch,
  VersionMismatch,
  CorruptFile,
  EmptyData,
  // eval
  LengthMismatch,
  ConstantTargets,
  // generic
  IoError,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emtk
