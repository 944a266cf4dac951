#include "emtk/error.hpp"

namespace emtk {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnsupportedElement: return "UnsupportedElement";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ValenceError: return "ValenceError";
    case ErrorCode::KekulizationError: return "KekulizationError";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::UnknownBondType: return "UnknownBondType";
    case ErrorCode::MultiFragment: return "MultiFragment";
    case ErrorCode::MissingDensity: return "MissingDensity";
    case ErrorCode::UnexpectedDensity: return "UnexpectedDensity";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::NonPositiveForLog: return "NonPositiveForLog";
    case ErrorCode::TooFewMaterials: return "TooFewMaterials";
    case ErrorCode::UnknownSubset: return "UnknownSubset";
    case ErrorCode::InvalidRegistry: return "InvalidRegistry";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantTargets: return "ConstantTargets";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace emtk
