#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skyshard/error.hpp"

namespace skyshard {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

static_assert(std::endian::native == std::endian::little, "little-endian host assumed");

/// Appends fixed-width little-endian fields to a growing buffer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes& out) : out_(&out) {}

  void u8(std::uint8_t v) { buf().push_back(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void i64(std::int64_t v) { put(v); }
  void f64(double v) { put(v); }
  void raw(ByteView v) { buf().insert(buf().end(), v.begin(), v.end()); }
  void raw(std::string_view v) { buf().insert(buf().end(), v.begin(), v.end()); }

  /// u16 length prefix + bytes.
  void str16(std::string_view s);
  /// u32 length prefix + bytes.
  void str32(std::string_view s);

  Bytes& bytes() { return buf(); }
  Bytes take() { return std::move(buf()); }

 private:
  template <class T>
  void put(T v) {
    std::uint8_t tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf().insert(buf().end(), tmp, tmp + sizeof(T));
  }
  Bytes& buf() { return out_ ? *out_ : own_; }

  Bytes own_;
  Bytes* out_ = nullptr;
};

/// Bounds-checked little-endian reader. Short reads throw Truncated naming the field.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8(const char* field) { return get<std::uint8_t>(field); }
  std::uint16_t u16(const char* field) { return get<std::uint16_t>(field); }
  std::uint32_t u32(const char* field) { return get<std::uint32_t>(field); }
  std::uint64_t u64(const char* field) { return get<std::uint64_t>(field); }
  std::int64_t i64(const char* field) { return get<std::int64_t>(field); }
  double f64(const char* field) { return get<double>(field); }
  ByteView raw(std::size_t n, const char* field);
  std::string str16(const char* field);
  std::string str32(const char* field);
  ByteView rest();

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  template <class T>
  T get(const char* field) {
    need(sizeof(T), field);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n, const char* field) const;

  ByteView data_;
  std::size_t pos_ = 0;
};

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace skyshard
