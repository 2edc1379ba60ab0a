#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skyshard/sealed_object.hpp"
#include "skyshard/table.hpp"

namespace skyshard {

inline constexpr std::uint64_t kDefaultTargetRows = 4096;

struct PartitionPolicy {
  std::uint64_t target_rows = kDefaultTargetRows;
  std::uint64_t max_rows = 2 * kDefaultTargetRows;

  /// max_rows defaults to twice target_rows.
  static PartitionPolicy with_target(std::uint64_t target_rows) { return {target_rows, 2 * target_rows}; }
  /// Throws InvalidArgument unless 1 <= target_rows <= max_rows.
  void validate() const;
};

/// Shard i holds rows [i*T, min((i+1)*T, n)).
std::vector<Table> partition_table(const Table& table, const PartitionPolicy& policy);

/// Several small tables of one schema loaded as one dataset are concatenated first.
std::vector<Table> partition_tables(std::span<const Table> tables, const PartitionPolicy& policy);

using Extents = std::vector<std::uint64_t>;

struct ArraySpec {
  ColumnType dtype = ColumnType::Float64;
  Extents shape;
  Extents chunk_shape;

  /// Throws InvalidArgument on rank mismatch, zero extents, oversized chunks or a Utf8 dtype.
  void validate() const;
  std::size_t rank() const { return shape.size(); }
  /// Chunks per dimension: ceil(shape[d] / chunk_shape[d]).
  Extents grid() const;
  std::uint64_t num_chunks() const;
  std::uint64_t num_cells() const;

  friend bool operator==(const ArraySpec&, const ArraySpec&) = default;
};

struct ChunkInfo {
  Extents coords;   // position in the chunk grid
  Extents origin;   // first cell covered
  Extents extents;  // clipped to the array boundary

  friend bool operator==(const ChunkInfo&, const ChunkInfo&) = default;
};

/// Row-major chunk enumeration; position in the result is the partition index.
std::vector<ChunkInfo> chunk_grid(const ArraySpec& spec);
ChunkInfo chunk_at(const ArraySpec& spec, std::uint64_t ordinal);
std::uint64_t chunk_ordinal(const ArraySpec& spec, const Extents& coords);

struct RowRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

struct PartitionEntry {
  ObjectName name;
  std::variant<RowRange, Extents> range;  // row range for tables, chunk coords for arrays
  std::string node_id;

  friend bool operator==(const PartitionEntry&, const PartitionEntry&) = default;
};

struct PartitionMap {
  std::string dataset;
  std::vector<PartitionEntry> entries;

  friend bool operator==(const PartitionMap&, const PartitionMap&) = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Rendezvous (highest random weight) choice of node for one object.
const std::string& choose_node(const ObjectName& name, std::span<const std::string> nodes);

/// Assigns every object by rendezvous hashing. Throws EmptyNodeSet, or
/// InvalidArgument on duplicate node ids.
PartitionMap place_objects(std::span<const ObjectName> names, std::span<const std::string> nodes);

}  // namespace skyshard
