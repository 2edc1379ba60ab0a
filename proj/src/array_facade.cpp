#include "skyshard/array_facade.hpp"

namespace skyshard {

std::uint64_t Hyperslab::num_cells() const {
  std::uint64_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

void check_slab(const ArraySpec& spec, const Hyperslab& slab) {
  if (slab.offset.size() != spec.rank() || slab.shape.size() != spec.rank()) {
    fail(ErrorCode::OutOfBounds, "slab rank differs from array rank " + std::to_string(spec.rank()));
  }
  for (std::size_t d = 0; d < spec.rank(); ++d) {
    if (slab.shape[d] == 0) fail(ErrorCode::OutOfBounds, "slab extent is zero in dimension " + std::to_string(d));
    if (slab.offset[d] > spec.shape[d] || slab.shape[d] > spec.shape[d] - slab.offset[d]) {
      fail(ErrorCode::OutOfBounds, "slab exceeds array bounds in dimension " + std::to_string(d));
    }
  }
}

std::optional<Hyperslab> intersect(const Hyperslab& a, const Hyperslab& b) {
  Hyperslab out;
  for (std::size_t d = 0; d < a.offset.size(); ++d) {
    std::uint64_t lo = std::max(a.offset[d], b.offset[d]);
    std::uint64_t hi = std::min(a.offset[d] + a.shape[d], b.offset[d] + b.shape[d]);
    if (lo >= hi) return std::nullopt;
    out.offset.push_back(lo);
    out.shape.push_back(hi - lo);
  }
  return out;
}

std::vector<std::uint64_t> touched_chunks(const ArraySpec& spec, const Hyperslab& slab) {
  const std::size_t rank = spec.rank();
  Extents first(rank), last(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    first[d] = slab.offset[d] / spec.chunk_shape[d];
    last[d] = (slab.offset[d] + slab.shape[d] - 1) / spec.chunk_shape[d];
  }
  std::vector<std::uint64_t> out;
  Extents c = first;
  for (;;) {
    out.push_back(chunk_ordinal(spec, c));
    std::size_t d = rank;
    for (;;) {
      if (d == 0) return out;
      --d;
      if (++c[d] <= last[d]) break;
      c[d] = first[d];
    }
  }
}

PartitionMap ArrayStore::create_array(const std::string& name, const ArraySpec& spec) {
  check_dataset_name(name);
  spec.validate();
  if (driver_.catalog().find(name)) fail(ErrorCode::DatasetExists, "dataset '" + name + "' exists");
  std::vector<ChunkInfo> grid = chunk_grid(spec);
  std::vector<ObjectName> names;
  for (std::size_t i = 0; i < grid.size(); ++i) names.push_back(ObjectName{name, i});
  std::vector<std::string> ids = driver_.node_ids();
  PartitionMap pm = place_objects(names, ids);

  DatasetInfo info;
  info.name = name;
  info.kind = ObjectKind::ArrayChunk;
  info.schema = Schema({{"v", spec.dtype}});
  info.num_rows = spec.num_cells();
  info.array = spec;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pm.entries[i].range = grid[i].coords;
    info.objects.push_back(ObjectMeta{names[i], pm.entries[i].node_id, {}, grid[i].coords, {}});
  }
  driver_.catalog().put(std::move(info));
  return pm;
}

ArraySpec ArrayStore::spec(const std::string& name) const {
  DatasetInfo info = driver_.catalog().get(name);
  if (!info.array) fail(ErrorCode::InvalidArgument, "'" + name + "' is not an array dataset");
  return *info.array;
}

ArrayStore::Target ArrayStore::target(const std::string& name, ColumnType dtype) const {
  Target t;
  t.info = driver_.catalog().get(name);
  if (!t.info.array) fail(ErrorCode::InvalidArgument, "'" + name + "' is not an array dataset");
  t.spec = *t.info.array;
  if (t.spec.dtype != dtype) {
    fail(ErrorCode::TypeMismatch, "array '" + name + "' holds " + std::string(type_name(t.spec.dtype)) + " cells");
  }
  return t;
}

std::optional<Table> ArrayStore::fetch_chunk(const ObjectMeta& meta) {
  ++stats_.chunk_reads;
  Bytes bytes;
  try {
    bytes = driver_.node(meta.node_id).get_object(meta.name);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotFound) return std::nullopt;
    // one retry for transport failures
    try {
      bytes = driver_.node(meta.node_id).get_object(meta.name);
    } catch (const Error& e2) {
      if (e2.code() == ErrorCode::NotFound) return std::nullopt;
      throw;
    }
  }
  return unseal(decode_object(bytes));
}

void ArrayStore::store_chunk(const ObjectMeta& meta, Table chunk) {
  ++stats_.chunk_writes;
  Bytes bytes = encode_object(seal(chunk, ObjectKind::ArrayChunk));
  try {
    driver_.node(meta.node_id).put_object(meta.name, bytes);
  } catch (const Error&) {
    driver_.node(meta.node_id).put_object(meta.name, bytes);
  }
}

std::mutex& ArrayStore::chunk_lock(const ObjectName& name) {
  return locks_[fnv1a64(name.render()) % locks_.size()];
}

}  // namespace skyshard
