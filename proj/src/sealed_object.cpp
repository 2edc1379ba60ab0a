#include "skyshard/sealed_object.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace skyshard {

ZoneMap compute_zone_map(const Table& table) {
  ZoneMap zm(table.num_columns());
  if (table.num_rows() == 0) return zm;
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    std::visit([&](const auto& vec) {
      using T = typename std::decay_t<decltype(vec)>::value_type;
      if constexpr (!std::is_same_v<T, std::string>) {
        auto [lo, hi] = std::minmax_element(vec.begin(), vec.end());
        zm[c] = ZoneEntry{Value(*lo), Value(*hi)};
      }
    }, table.column(c));
  }
  return zm;
}

void encode_rows(const Table& table, Bytes& out) {
  ByteWriter w(out);
  const std::size_t ncols = table.num_columns();
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      switch (table.schema()[c].type) {
        case ColumnType::Int64: w.i64(table.column_as<std::int64_t>(c)[r]); break;
        case ColumnType::Float64: w.f64(table.column_as<double>(c)[r]); break;
        case ColumnType::Utf8: w.str32(table.column_as<std::string>(c)[r]); break;
      }
    }
  }
}

Table decode_rows(const Schema& schema, std::uint64_t row_count, ByteView payload) {
  Table table(schema);
  const std::size_t ncols = schema.size();
  // Every row takes at least 4 bytes per column; a count beyond that bound is corrupt.
  if (row_count > payload.size() / 4 + 1 && row_count != 0) {
    fail(ErrorCode::Truncated, "truncated at payload: row_count " + std::to_string(row_count) + " exceeds payload");
  }
  for (std::size_t c = 0; c < ncols; ++c) {
    std::visit([&](auto& v) { v.reserve(row_count); }, table.mutable_column(c));
  }
  ByteReader r(payload);
  for (std::uint64_t row = 0; row < row_count; ++row) {
    for (std::size_t c = 0; c < ncols; ++c) {
      auto& col = table.mutable_column(c);
      switch (schema[c].type) {
        case ColumnType::Int64: std::get<0>(col).push_back(r.i64("payload")); break;
        case ColumnType::Float64: std::get<1>(col).push_back(r.f64("payload")); break;
        case ColumnType::Utf8: std::get<2>(col).push_back(r.str32("payload")); break;
      }
    }
  }
  if (!r.done()) fail(ErrorCode::DecodeFailed, "payload has " + std::to_string(r.remaining()) + " trailing bytes");
  table.set_num_rows(row_count);
  return table;
}

SealedObject seal(const Table& table, ObjectKind kind) {
  SealedObject obj;
  obj.kind = kind;
  obj.schema = table.schema();
  obj.row_count = table.num_rows();
  obj.zone_map = compute_zone_map(table);
  encode_rows(table, obj.payload);
  return obj;
}

Table unseal(const SealedObject& obj) {
  if (obj.compressed) return decode_rows(obj.schema, obj.row_count, inflate_bytes(obj.payload));
  return decode_rows(obj.schema, obj.row_count, obj.payload);
}

namespace {

void write_zone_value(ByteWriter& w, const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) {
    w.i64(*i);
  } else {
    w.f64(std::get<double>(v));
  }
}

Value read_zone_value(ByteReader& r, ColumnType t) {
  if (t == ColumnType::Int64) return r.i64("zone_map");
  return r.f64("zone_map");
}

}  // namespace

Bytes encode_object(const SealedObject& obj) {
  Bytes out;
  out.reserve(obj.payload.size() + 64);
  ByteWriter w(out);
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kObjectMagic), 4));
  w.u8(static_cast<std::uint8_t>(obj.kind));
  w.u32(obj.version);
  w.str32(obj.schema.to_text());
  w.u64(obj.row_count);
  w.u8(obj.compressed ? 1 : 0);
  for (std::size_t c = 0; c < obj.schema.size(); ++c) {
    const auto& z = c < obj.zone_map.size() ? obj.zone_map[c] : std::optional<ZoneEntry>{};
    w.u8(z ? 1 : 0);
    if (z) {
      write_zone_value(w, z->min);
      write_zone_value(w, z->max);
    }
  }
  w.u64(obj.payload.size());
  w.raw(obj.payload);
  return out;
}

SealedObject decode_object(ByteView data) {
  ByteReader r(data);
  SealedObject obj;
  auto magic = r.raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kObjectMagic)) fail(ErrorCode::BadMagic, "bad magic: expected SKY1");
  auto kind = r.u8("kind");
  if (kind > 1) fail(ErrorCode::DecodeFailed, "invalid kind " + std::to_string(kind));
  obj.kind = static_cast<ObjectKind>(kind);
  obj.version = r.u32("version");
  if (obj.version != kFormatVersion) fail(ErrorCode::UnsupportedVersion, "unsupported version " + std::to_string(obj.version));
  obj.schema = Schema::parse(r.str32("schema_text"));
  obj.row_count = r.u64("row_count");
  auto flag = r.u8("compressed");
  if (flag > 1) fail(ErrorCode::DecodeFailed, "invalid compressed flag");
  obj.compressed = flag == 1;
  obj.zone_map.resize(obj.schema.size());
  for (std::size_t c = 0; c < obj.schema.size(); ++c) {
    auto present = r.u8("zone_map");
    if (present > 1) fail(ErrorCode::DecodeFailed, "invalid zone_map presence flag");
    if (!present) continue;
    auto t = obj.schema[c].type;
    if (!is_numeric(t)) fail(ErrorCode::DecodeFailed, "zone_map present for utf8 column '" + obj.schema[c].name + "'");
    Value lo = read_zone_value(r, t);
    Value hi = read_zone_value(r, t);
    obj.zone_map[c] = ZoneEntry{std::move(lo), std::move(hi)};
  }
  auto len = r.u64("payload_len");
  if (len > r.remaining()) {
    fail(ErrorCode::Truncated, "truncated at payload: payload_len " + std::to_string(len) + " exceeds remaining " +
                                   std::to_string(r.remaining()));
  }
  auto payload = r.raw(static_cast<std::size_t>(len), "payload");
  obj.payload.assign(payload.begin(), payload.end());
  if (!r.done()) fail(ErrorCode::DecodeFailed, "trailing bytes after payload");
  return obj;
}

Bytes deflate_bytes(ByteView raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  Bytes out(bound);
  int rc = compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION);
  if (rc != Z_OK) fail(ErrorCode::Internal, "deflate failed");
  out.resize(bound);
  return out;
}

Bytes inflate_bytes(ByteView compressed) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail(ErrorCode::Internal, "inflateInit failed");
  Bytes out;
  std::uint8_t buf[1 << 16];
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail(ErrorCode::DecodeFailed, "corrupt compressed payload");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail(ErrorCode::Truncated, "truncated at payload: compressed stream ends early");
    }
  }
  inflateEnd(&zs);
  return out;
}

SealedObject with_compression(const SealedObject& obj, bool compressed) {
  if (obj.compressed == compressed) return obj;
  SealedObject out = obj;
  out.payload = compressed ? deflate_bytes(obj.payload) : inflate_bytes(obj.payload);
  out.compressed = compressed;
  return out;
}

bool valid_dataset_name(std::string_view name) {
  if (name.empty()) return false;
  return name.find_first_of(std::string_view("./\0", 3)) == std::string_view::npos;
}

void check_dataset_name(std::string_view name) {
  if (!valid_dataset_name(name)) fail(ErrorCode::InvalidArgument, "invalid dataset name '" + std::string(name) + "'");
}

std::string ObjectName::render() const {
  check_dataset_name(dataset);
  if (partition_index >= kMaxPartitions) fail(ErrorCode::InvalidArgument, "partition index exceeds 8 digits");
  char digits[16];
  std::snprintf(digits, sizeof(digits), "%08llu", static_cast<unsigned long long>(partition_index));
  return dataset + "." + digits;
}

ObjectName ObjectName::parse(std::string_view text) {
  auto dot = text.rfind('.');
  if (dot == std::string_view::npos || text.size() - dot - 1 != 8) {
    fail(ErrorCode::InvalidArgument, "malformed object name '" + std::string(text) + "'");
  }
  ObjectName name;
  name.dataset = std::string(text.substr(0, dot));
  check_dataset_name(name.dataset);
  auto digits = text.substr(dot + 1);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    fail(ErrorCode::InvalidArgument, "malformed object name '" + std::string(text) + "'");
  }
  std::from_chars(digits.data(), digits.data() + digits.size(), name.partition_index);
  return name;
}

}  // namespace skyshard
