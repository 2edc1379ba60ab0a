#include "skyshard/error.hpp"

namespace skyshard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::SchemaParse: return "SchemaParse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DecodeFailed: return "DecodeFailed";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::IndexMissing: return "IndexMissing";
    case ErrorCode::UnsupportedIndexType: return "UnsupportedIndexType";
    case ErrorCode::AlreadyInTargetMode: return "AlreadyInTargetMode";
    case ErrorCode::EmptyNodeSet: return "EmptyNodeSet";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NodeUnreachable: return "NodeUnreachable";
    case ErrorCode::SubQueryFailed: return "SubQueryFailed";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MixedVariants: return "MixedVariants";
    case ErrorCode::HistogramParamMismatch: return "HistogramParamMismatch";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::DatasetExists: return "DatasetExists";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::Internal: return "Internal";
    case ErrorCode::AddressInUse: return "AddressInUse";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace skyshard
