#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "skyshard/aggregate.hpp"
#include "skyshard/query.hpp"
#include "skyshard/sealed_object.hpp"

namespace skyshard {

struct NodeConfig {
  std::string node_id;
  std::string listen_address = "127.0.0.1:0";
  std::filesystem::path data_dir;
  /// fsync object files and directories before acknowledging a put.
  bool sync_writes = true;
};

/// Selected rows plus the stored-order ordinal of each, for global ordering.
struct RowsResult {
  SealedObject rows;
  std::vector<std::uint32_t> ordinals;

  friend bool operator==(const RowsResult&, const RowsResult&) = default;
};

using ExecResult = std::variant<RowsResult, PartialAggState>;

struct IndexHit {
  std::uint64_t partition_index = 0;
  std::vector<std::uint32_t> ordinals;

  friend bool operator==(const IndexHit&, const IndexHit&) = default;
};

enum class CompressMode : std::uint8_t { Decompress = 0, Compress = 1 };

/// Node-local persistent key/value map. Snapshots to one file with a
/// write-temp-then-rename commit after every mutation batch.
class KvStore {
 public:
  KvStore() = default;
  KvStore(std::filesystem::path file, bool sync);

  std::optional<Bytes> get(const std::string& key) const;
  void put(std::string key, Bytes value) { map_[std::move(key)] = std::move(value); }
  void erase(const std::string& key) { map_.erase(key); }
  /// Keys starting with `prefix`, in order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  void commit() const;

 private:
  std::filesystem::path file_;
  bool sync_ = true;
  std::map<std::string, Bytes> map_;
};

/// The storage node: chunk store (one file per object), local index, and the
/// object-local extension functions.
class StorageNode {
 public:
  explicit StorageNode(NodeConfig config);

  const NodeConfig& config() const { return config_; }
  const std::string& node_id() const { return config_.node_id; }

  /// Durable whole-object replace. Throws DecodeFailed (nothing stored) or IoError.
  void put_object(const ObjectName& name, ByteView data);
  /// Throws NotFound.
  Bytes get_object(const ObjectName& name) const;
  bool has_object(const ObjectName& name) const;

  /// Filter + project, or a partial aggregate over the filtered rows. Never
  /// mutates the stored object. Throws NotFound, UnknownColumn, TypeMismatch.
  ExecResult exec_extension(const ObjectName& name, const SubQuery& sq) const;

  /// True only when the object's zone map proves `predicate` matches no row.
  bool prune_check(const ObjectName& name, const Predicate& predicate) const;

  /// Rebuilds the index of `column` for one object; returns the number of
  /// distinct values. Throws NotFound, UnknownColumn, UnsupportedIndexType.
  std::size_t build_index(const ObjectName& name, const std::string& column);

  /// Exact-match lookup across this node's objects. Throws IndexMissing.
  std::vector<IndexHit> lookup_index(const std::string& dataset, const std::string& column, const Value& value) const;

  /// Returns true when the object was already in the target mode.
  bool compress_object(const ObjectName& name, CompressMode mode);

 private:
  std::filesystem::path object_path(const ObjectName& name) const;
  SealedObject load(const ObjectName& name) const;
  void write_file_atomic(const std::filesystem::path& path, ByteView data) const;
  std::mutex& lock_for(const ObjectName& name) const;
  // Caller holds index_mutex_ exclusively.
  std::size_t index_object_locked(const ObjectName& name, const SealedObject& obj, const std::string& column);
  void drop_partition_locked(const std::string& prefix, std::uint64_t partition);

  NodeConfig config_;
  std::filesystem::path objects_dir_;
  mutable std::array<std::mutex, 64> object_locks_;
  mutable std::shared_mutex index_mutex_;
  KvStore index_;
  mutable std::atomic<std::uint64_t> tmp_counter_{0};
};

/// Key encoding of an index literal; Float64 is refused.
std::string index_value_key(const Value& v);

}  // namespace skyshard
