#include "skyshard/bytes.hpp"

#include <limits>

namespace skyshard {

void ByteWriter::str16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) fail(ErrorCode::InvalidArgument, "string too long for u16 length");
  u16(static_cast<std::uint16_t>(s.size()));
  raw(s);
}

void ByteWriter::str32(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::InvalidArgument, "string too long for u32 length");
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s);
}

void ByteReader::need(std::size_t n, const char* field) const {
  if (remaining() < n) {
    fail(ErrorCode::Truncated, std::string("truncated at ") + field + ": need " + std::to_string(n) + " bytes, have " +
                                   std::to_string(remaining()));
  }
}

ByteView ByteReader::raw(std::size_t n, const char* field) {
  need(n, field);
  ByteView v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::string ByteReader::str16(const char* field) {
  auto n = u16(field);
  auto v = raw(n, field);
  return {v.begin(), v.end()};
}

std::string ByteReader::str32(const char* field) {
  auto n = u32(field);
  auto v = raw(n, field);
  return {v.begin(), v.end()};
}

ByteView ByteReader::rest() {
  ByteView v = data_.subspan(pos_);
  pos_ = data_.size();
  return v;
}

}  // namespace skyshard
