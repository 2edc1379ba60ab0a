#include "skyshard/storage_node.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <thread>

namespace skyshard {

namespace fs = std::filesystem;

namespace {

void write_all_fd(int fd, const std::uint8_t* data, std::size_t n, const fs::path& path) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::IoError, "write " + path.string() + ": " + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void atomic_write(const fs::path& path, const fs::path& tmp, ByteView data, bool sync) {
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::IoError, "open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all_fd(fd, data.data(), data.size(), tmp);
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  if (sync && ::fsync(fd) != 0) {
    ::close(fd);
    ::unlink(tmp.c_str());
    fail(ErrorCode::IoError, "fsync " + tmp.string() + ": " + std::strerror(errno));
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    fail(ErrorCode::IoError, "rename " + tmp.string() + ": " + std::strerror(errno));
  }
  if (sync) fsync_dir(path.parent_path());
}

std::optional<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  in.seekg(0, std::ios::end);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes out(size);
  if (size > 0) in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size));
  if (!in) fail(ErrorCode::IoError, "read " + path.string() + " failed");
  return out;
}

// Index keys: "e\0<dataset>\0<column>\0<value>"; built markers: "m\0<dataset>\0<column>".
std::string entry_prefix(const std::string& dataset, const std::string& column) {
  return std::string("e") + '\0' + dataset + '\0' + column + '\0';
}

std::string marker_key(const std::string& dataset, const std::string& column) {
  return std::string("m") + '\0' + dataset + '\0' + column;
}

std::string marker_prefix(const std::string& dataset) { return std::string("m") + '\0' + dataset + '\0'; }

std::vector<IndexHit> decode_hits(ByteView data) {
  std::vector<IndexHit> hits;
  ByteReader r(data);
  while (!r.done()) {
    IndexHit h;
    h.partition_index = r.u64("index partition");
    auto n = r.u32("index count");
    h.ordinals.resize(n);
    for (auto& o : h.ordinals) o = r.u32("index ordinal");
    hits.push_back(std::move(h));
  }
  return hits;
}

Bytes encode_hits(const std::vector<IndexHit>& hits) {
  ByteWriter w;
  for (const auto& h : hits) {
    w.u64(h.partition_index);
    w.u32(static_cast<std::uint32_t>(h.ordinals.size()));
    for (auto o : h.ordinals) w.u32(o);
  }
  return w.take();
}

}  // namespace

std::string index_value_key(const Value& v) {
  ByteWriter w;
  switch (type_of(v)) {
    case ColumnType::Int64:
      w.u8(0);
      w.i64(std::get<std::int64_t>(v));
      break;
    case ColumnType::Utf8:
      w.u8(2);
      w.raw(std::get<std::string>(v));
      break;
    case ColumnType::Float64: fail(ErrorCode::UnsupportedIndexType, "f64 values cannot be indexed");
  }
  const auto& b = w.bytes();
  return {b.begin(), b.end()};
}

// ---------------------------------------------------------------------------

KvStore::KvStore(fs::path file, bool sync) : file_(std::move(file)), sync_(sync) {
  auto data = read_file(file_);
  if (!data) return;
  ByteReader r(*data);
  auto n = r.u64("kv count");
  for (std::uint64_t i = 0; i < n; ++i) {
    auto key = r.str32("kv key");
    auto len = r.u32("kv value");
    auto v = r.raw(len, "kv value");
    map_.emplace(std::move(key), Bytes(v.begin(), v.end()));
  }
}

std::optional<Bytes> KvStore::get(const std::string& key) const {
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> KvStore::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = map_.lower_bound(prefix); it != map_.end() && it->first.starts_with(prefix); ++it) {
    out.push_back(it->first);
  }
  return out;
}

void KvStore::commit() const {
  ByteWriter w;
  w.u64(map_.size());
  for (const auto& [k, v] : map_) {
    w.str32(k);
    w.u32(static_cast<std::uint32_t>(v.size()));
    w.raw(v);
  }
  fs::path tmp = file_;
  tmp += ".tmp";
  atomic_write(file_, tmp, w.bytes(), sync_);
}

// ---------------------------------------------------------------------------

StorageNode::StorageNode(NodeConfig config) : config_(std::move(config)) {
  if (config_.node_id.empty()) fail(ErrorCode::BadConfig, "node_id must be non-empty");
  if (config_.data_dir.empty()) fail(ErrorCode::BadConfig, "data_dir must be set");
  objects_dir_ = config_.data_dir / "objects";
  std::error_code ec;
  fs::create_directories(objects_dir_, ec);
  fs::create_directories(config_.data_dir / "index", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + config_.data_dir.string() + ": " + ec.message());
  // Leftovers of interrupted writes were never acknowledged.
  for (const auto& entry : fs::directory_iterator(objects_dir_)) {
    if (entry.path().extension() == ".tmp") fs::remove(entry.path(), ec);
  }
  index_ = KvStore(config_.data_dir / "index" / "index.kv", config_.sync_writes);
}

fs::path StorageNode::object_path(const ObjectName& name) const { return objects_dir_ / name.render(); }

std::mutex& StorageNode::lock_for(const ObjectName& name) const {
  return object_locks_[std::hash<std::string>{}(name.render()) % object_locks_.size()];
}

void StorageNode::write_file_atomic(const fs::path& path, ByteView data) const {
  fs::path tmp = path;
  tmp += "." + std::to_string(tmp_counter_.fetch_add(1)) + ".tmp";
  atomic_write(path, tmp, data, config_.sync_writes);
}

SealedObject StorageNode::load(const ObjectName& name) const { return decode_object(get_object(name)); }

void StorageNode::put_object(const ObjectName& name, ByteView data) {
  SealedObject obj;
  try {
    obj = decode_object(data);
    if (!obj.compressed) decode_rows(obj.schema, obj.row_count, obj.payload);
  } catch (const Error& e) {
    fail(ErrorCode::DecodeFailed, "rejected " + name.render() + ": " + e.what());
  }
  std::lock_guard lock(lock_for(name));
  write_file_atomic(object_path(name), data);

  // Keep indexes built on this dataset exact across overwrites.
  std::unique_lock index_lock(index_mutex_);
  auto markers = index_.keys_with_prefix(marker_prefix(name.dataset));
  if (markers.empty()) return;
  for (const auto& key : markers) {
    std::string column = key.substr(marker_prefix(name.dataset).size());
    auto idx = obj.schema.find(column);
    if (idx && obj.schema[*idx].type != ColumnType::Float64) {
      index_object_locked(name, obj, column);
    } else {
      drop_partition_locked(entry_prefix(name.dataset, column), name.partition_index);
    }
  }
  index_.commit();
}

Bytes StorageNode::get_object(const ObjectName& name) const {
  auto data = read_file(object_path(name));
  if (!data) fail(ErrorCode::NotFound, "object " + name.render() + " not found on node " + config_.node_id);
  return std::move(*data);
}

bool StorageNode::has_object(const ObjectName& name) const { return fs::exists(object_path(name)); }

ExecResult StorageNode::exec_extension(const ObjectName& name, const SubQuery& sq) const {
  SealedObject obj = load(name);
  const Schema& schema = obj.schema;
  Predicate bound = bind(sq.predicate, schema);
  std::vector<std::size_t> proj;
  if (sq.aggregate) {
    check_agg_column(*sq.aggregate, schema[schema.index_of(sq.aggregate->column)].type);
    if (sq.aggregate->fn == AggFn::MedianApprox && !sq.histogram) {
      fail(ErrorCode::InvalidArgument, "median_approx sub-query lacks RANGE");
    }
  } else {
    proj = sq.projection.resolve(schema);
  }

  // Local optimization: zone-map proof that nothing matches skips the payload.
  bool skip = zone_map_excludes(bound, schema, obj.zone_map);
  Table table = skip ? Table(schema) : unseal(obj);
  std::vector<std::uint32_t> rows = skip ? std::vector<std::uint32_t>{} : filter_rows(bound, table);

  if (sq.aggregate) return accumulate(*sq.aggregate, table, rows, sq.histogram);
  RowsResult out;
  out.rows = seal(table.take(rows).project(proj), obj.kind);
  out.ordinals = std::move(rows);
  return out;
}

bool StorageNode::prune_check(const ObjectName& name, const Predicate& predicate) const {
  SealedObject obj = load(name);
  return zone_map_excludes(bind(predicate, obj.schema), obj.schema, obj.zone_map);
}

void StorageNode::drop_partition_locked(const std::string& prefix, std::uint64_t partition) {
  for (const auto& key : index_.keys_with_prefix(prefix)) {
    auto hits = decode_hits(*index_.get(key));
    std::erase_if(hits, [&](const IndexHit& h) { return h.partition_index == partition; });
    if (hits.empty()) {
      index_.erase(key);
    } else {
      index_.put(key, encode_hits(hits));
    }
  }
}

std::size_t StorageNode::index_object_locked(const ObjectName& name, const SealedObject& obj,
                                             const std::string& column) {
  const std::string prefix = entry_prefix(name.dataset, column);
  drop_partition_locked(prefix, name.partition_index);
  Table table = unseal(obj);
  std::size_t col = table.schema().index_of(column);
  std::map<std::string, std::vector<std::uint32_t>> groups;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    groups[index_value_key(table.value(r, col))].push_back(static_cast<std::uint32_t>(r));
  }
  for (auto& [value_key, ordinals] : groups) {
    std::string key = prefix + value_key;
    std::vector<IndexHit> hits;
    if (auto existing = index_.get(key)) hits = decode_hits(*existing);
    IndexHit hit{name.partition_index, std::move(ordinals)};
    auto pos = std::lower_bound(hits.begin(), hits.end(), hit.partition_index,
                                [](const IndexHit& h, std::uint64_t p) { return h.partition_index < p; });
    hits.insert(pos, std::move(hit));
    index_.put(key, encode_hits(hits));
  }
  index_.put(marker_key(name.dataset, column), {});
  return groups.size();
}

std::size_t StorageNode::build_index(const ObjectName& name, const std::string& column) {
  std::lock_guard lock(lock_for(name));
  SealedObject obj = load(name);
  auto type = obj.schema[obj.schema.index_of(column)].type;
  if (type == ColumnType::Float64) {
    fail(ErrorCode::UnsupportedIndexType, "column '" + column + "' is f64; equality indexes need i64 or utf8");
  }
  std::unique_lock index_lock(index_mutex_);
  std::size_t n = index_object_locked(name, obj, column);
  index_.commit();
  return n;
}

std::vector<IndexHit> StorageNode::lookup_index(const std::string& dataset, const std::string& column,
                                                const Value& value) const {
  std::shared_lock index_lock(index_mutex_);
  if (!index_.get(marker_key(dataset, column))) {
    fail(ErrorCode::IndexMissing, "no index on " + dataset + "." + column + " at node " + config_.node_id);
  }
  auto data = index_.get(entry_prefix(dataset, column) + index_value_key(value));
  if (!data) return {};
  return decode_hits(*data);
}

bool StorageNode::compress_object(const ObjectName& name, CompressMode mode) {
  std::lock_guard lock(lock_for(name));
  SealedObject obj = load(name);
  bool target = mode == CompressMode::Compress;
  if (obj.compressed == target) return true;
  write_file_atomic(object_path(name), encode_object(with_compression(obj, target)));
  return false;
}

}  // namespace skyshard
