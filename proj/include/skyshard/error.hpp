#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skyshard {

enum class ErrorCode : std::uint8_t {
  BadMagic = 1,
  UnsupportedVersion,
  Truncated,
  SchemaParse,
  InvalidArgument,
  NotFound,
  DecodeFailed,
  UnknownColumn,
  TypeMismatch,
  IndexMissing,
  UnsupportedIndexType,
  AlreadyInTargetMode,
  EmptyNodeSet,
  IoError,
  NodeUnreachable,
  SubQueryFailed,
  SchemaMismatch,
  EmptyInput,
  MixedVariants,
  HistogramParamMismatch,
  UnknownDataset,
  DatasetExists,
  OutOfBounds,
  LengthMismatch,
  FrameTooLarge,
  ParseError,
  BadRequest,
  Internal,
  AddressInUse,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Query text errors carry the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(ErrorCode::ParseError, what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace skyshard
