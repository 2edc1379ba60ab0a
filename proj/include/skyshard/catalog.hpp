#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "skyshard/partitioner.hpp"
#include "skyshard/sealed_object.hpp"

namespace skyshard {

struct ObjectMeta {
  ObjectName name;
  std::string node_id;
  RowRange rows;       // tables
  Extents coords;      // arrays
  ZoneMap zone_map;    // empty when unknown
  friend bool operator==(const ObjectMeta&, const ObjectMeta&) = default;
};

struct DatasetInfo {
  std::string name;
  ObjectKind kind = ObjectKind::TableShard;
  Schema schema;
  std::uint64_t num_rows = 0;
  std::optional<ArraySpec> array;
  std::vector<ObjectMeta> objects;  // by partition index
  std::set<std::string> indexed_columns;

  PartitionMap partition_map() const;
  friend bool operator==(const DatasetInfo&, const DatasetInfo&) = default;
};

/// The driver's dataset -> partition map store. Concurrent readers, exclusive
/// writers; every mutation is persisted before returning when a file is set.
class Catalog {
 public:
  static constexpr int kVersion = 1;

  /// In-memory only.
  Catalog() = default;
  /// Loads `file` if it exists. Throws BadConfig on an unreadable or newer file.
  explicit Catalog(std::filesystem::path file);

  std::optional<DatasetInfo> find(const std::string& name) const;
  /// Throws UnknownDataset.
  DatasetInfo get(const std::string& name) const;
  void put(DatasetInfo info);
  void remove(const std::string& name);
  /// Adds or clears one indexed-column flag. Throws UnknownDataset.
  void set_indexed(const std::string& name, const std::string& column, bool indexed);
  std::vector<std::string> names() const;

  std::string to_json_text() const;
  static std::map<std::string, DatasetInfo> parse_json_text(const std::string& text);

 private:
  void save_locked() const;

  std::filesystem::path file_;
  mutable std::shared_mutex mu_;
  std::map<std::string, DatasetInfo> datasets_;
};

}  // namespace skyshard
