#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyshard/bytes.hpp"
#include "skyshard/table.hpp"

namespace skyshard {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kObjectMagic[4] = {'S', 'K', 'Y', '1'};

enum class ObjectKind : std::uint8_t { TableShard = 0, ArrayChunk = 1 };

/// Min/max of one numeric column. Both hold the column's value type.
struct ZoneEntry {
  Value min;
  Value max;

  friend bool operator==(const ZoneEntry&, const ZoneEntry&) = default;
};

/// One slot per schema column; empty for Utf8 columns and zero-row tables.
using ZoneMap = std::vector<std::optional<ZoneEntry>>;

ZoneMap compute_zone_map(const Table& table);

/// The stored unit: format wrapper + metadata + row payload.
struct SealedObject {
  ObjectKind kind = ObjectKind::TableShard;
  std::uint32_t version = kFormatVersion;
  Schema schema;
  std::uint64_t row_count = 0;
  bool compressed = false;
  ZoneMap zone_map;
  Bytes payload;

  friend bool operator==(const SealedObject&, const SealedObject&) = default;
};

/// Wraps a table: computes its zone map and row-major payload.
SealedObject seal(const Table& table, ObjectKind kind = ObjectKind::TableShard);
/// Recovers the table, inflating the payload first when compressed.
Table unseal(const SealedObject& obj);

Bytes encode_object(const SealedObject& obj);
/// Validates magic, version and every length. Throws BadMagic, UnsupportedVersion,
/// Truncated or SchemaParse naming the first bad field.
SealedObject decode_object(ByteView data);

void encode_rows(const Table& table, Bytes& out);
Table decode_rows(const Schema& schema, std::uint64_t row_count, ByteView payload);

/// Deflate (zlib) codec used for object compression.
Bytes deflate_bytes(ByteView raw);
Bytes inflate_bytes(ByteView compressed);

/// Returns a copy with the payload re-encoded; no-op when already in the target mode.
SealedObject with_compression(const SealedObject& obj, bool compressed);

/// "<dataset>.<8-digit zero-padded partition index>"
struct ObjectName {
  std::string dataset;
  std::uint64_t partition_index = 0;

  std::string render() const;
  /// Throws InvalidArgument.
  static ObjectName parse(std::string_view text);

  friend auto operator<=>(const ObjectName&, const ObjectName&) = default;
};

inline constexpr std::uint64_t kMaxPartitions = 100'000'000;

/// Dataset names are non-empty and contain no '.', '/' or NUL.
bool valid_dataset_name(std::string_view name);
void check_dataset_name(std::string_view name);

}  // namespace skyshard
