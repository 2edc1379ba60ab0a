#include "skyshard/partitioner.hpp"

#include <set>

namespace skyshard {

void PartitionPolicy::validate() const {
  if (target_rows < 1 || max_rows < target_rows) {
    fail(ErrorCode::InvalidArgument, "partition policy needs 1 <= target_rows <= max_rows");
  }
}

std::vector<Table> partition_table(const Table& table, const PartitionPolicy& policy) {
  policy.validate();
  std::vector<Table> shards;
  const std::uint64_t n = table.num_rows();
  for (std::uint64_t begin = 0; begin < n; begin += policy.target_rows) {
    shards.push_back(table.slice(begin, std::min(begin + policy.target_rows, n)));
  }
  return shards;
}

std::vector<Table> partition_tables(std::span<const Table> tables, const PartitionPolicy& policy) {
  if (tables.empty()) return {};
  Table all(tables.front().schema());
  for (const auto& t : tables) all.append(t);
  return partition_table(all, policy);
}

void ArraySpec::validate() const {
  if (dtype == ColumnType::Utf8) fail(ErrorCode::InvalidArgument, "array dtype must be i64 or f64");
  if (shape.empty()) fail(ErrorCode::InvalidArgument, "array rank must be at least 1");
  if (chunk_shape.size() != shape.size()) fail(ErrorCode::InvalidArgument, "chunk rank differs from array rank");
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (shape[d] == 0 || chunk_shape[d] == 0) fail(ErrorCode::InvalidArgument, "extents must be positive");
    if (chunk_shape[d] > shape[d]) fail(ErrorCode::InvalidArgument, "chunk extent exceeds array extent");
  }
  if (num_chunks() >= kMaxPartitions) fail(ErrorCode::InvalidArgument, "chunk grid exceeds 10^8 objects");
}

Extents ArraySpec::grid() const {
  Extents g(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) g[d] = (shape[d] + chunk_shape[d] - 1) / chunk_shape[d];
  return g;
}

std::uint64_t ArraySpec::num_chunks() const {
  std::uint64_t n = 1;
  for (auto g : grid()) n *= g;
  return n;
}

std::uint64_t ArraySpec::num_cells() const {
  std::uint64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

ChunkInfo chunk_at(const ArraySpec& spec, std::uint64_t ordinal) {
  const Extents g = spec.grid();
  ChunkInfo c;
  c.coords.resize(g.size());
  for (std::size_t d = g.size(); d-- > 0;) {
    c.coords[d] = ordinal % g[d];
    ordinal /= g[d];
  }
  c.origin.resize(g.size());
  c.extents.resize(g.size());
  for (std::size_t d = 0; d < g.size(); ++d) {
    c.origin[d] = c.coords[d] * spec.chunk_shape[d];
    c.extents[d] = std::min(spec.chunk_shape[d], spec.shape[d] - c.origin[d]);
  }
  return c;
}

std::uint64_t chunk_ordinal(const ArraySpec& spec, const Extents& coords) {
  const Extents g = spec.grid();
  std::uint64_t ord = 0;
  for (std::size_t d = 0; d < g.size(); ++d) ord = ord * g[d] + coords[d];
  return ord;
}

std::vector<ChunkInfo> chunk_grid(const ArraySpec& spec) {
  spec.validate();
  std::vector<ChunkInfo> out;
  const auto n = spec.num_chunks();
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(chunk_at(spec, i));
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::string& choose_node(const ObjectName& name, std::span<const std::string> nodes) {
  if (nodes.empty()) fail(ErrorCode::EmptyNodeSet, "no nodes to place objects on");
  const std::string key = name.render() + ":";
  const std::string* best = nullptr;
  std::uint64_t best_weight = 0;
  for (const auto& node : nodes) {
    std::uint64_t w = fnv1a64(key + node);
    if (!best || w > best_weight || (w == best_weight && node < *best)) {
      best = &node;
      best_weight = w;
    }
  }
  return *best;
}

PartitionMap place_objects(std::span<const ObjectName> names, std::span<const std::string> nodes) {
  if (nodes.empty()) fail(ErrorCode::EmptyNodeSet, "no nodes to place objects on");
  std::set<std::string_view> seen;
  for (const auto& n : nodes) {
    if (n.empty() || !seen.insert(n).second) fail(ErrorCode::InvalidArgument, "node ids must be unique and non-empty");
  }
  PartitionMap map;
  if (!names.empty()) map.dataset = names.front().dataset;
  map.entries.reserve(names.size());
  for (const auto& name : names) map.entries.push_back({name, RowRange{}, choose_node(name, nodes)});
  return map;
}

}  // namespace skyshard
