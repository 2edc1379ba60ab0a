#pragma once

#include <array>
#include <atomic>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skyshard/driver.hpp"

namespace skyshard {

struct Hyperslab {
  Extents offset;
  Extents shape;

  std::uint64_t num_cells() const;
  friend bool operator==(const Hyperslab&, const Hyperslab&) = default;
};

/// Throws OutOfBounds unless the slab has the array's rank, positive extents
/// and lies inside the array.
void check_slab(const ArraySpec& spec, const Hyperslab& slab);

/// Ordinals of the chunks whose boxes intersect `slab`, ascending.
std::vector<std::uint64_t> touched_chunks(const ArraySpec& spec, const Hyperslab& slab);

/// Intersection of two boxes given as (origin, extents); nullopt when empty.
std::optional<Hyperslab> intersect(const Hyperslab& a, const Hyperslab& b);

/// Copies the cells of `region` between two row-major boxes containing it.
template <class T>
void copy_region(const Hyperslab& region, const Hyperslab& src_box, std::span<const T> src, const Hyperslab& dst_box,
                 std::span<T> dst) {
  const std::size_t rank = region.shape.size();
  if (rank == 0) return;
  auto strides = [rank](const Extents& shape) {
    Extents s(rank, 1);
    for (std::size_t d = rank - 1; d > 0; --d) s[d - 1] = s[d] * shape[d];
    return s;
  };
  const Extents ss = strides(src_box.shape), ds = strides(dst_box.shape);
  const std::uint64_t run = region.shape[rank - 1];
  Extents idx(rank, 0);  // position within region, innermost dim stays 0
  for (;;) {
    std::uint64_t so = 0, doff = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      std::uint64_t abs = region.offset[d] + idx[d];
      so += (abs - src_box.offset[d]) * ss[d];
      doff += (abs - dst_box.offset[d]) * ds[d];
    }
    std::copy_n(src.data() + so, run, dst.data() + doff);
    std::size_t d = rank - 1;
    for (;;) {
      if (d == 0) return;
      --d;
      if (++idx[d] < region.shape[d]) break;
      idx[d] = 0;
    }
  }
}

/// n-dimensional array datasets stored as chunk objects through a Driver.
/// Chunks materialize lazily; never-written cells read as 0.
class ArrayStore {
 public:
  struct IoStats {
    std::atomic<std::uint64_t> chunk_reads{0};
    std::atomic<std::uint64_t> chunk_writes{0};
  };

  explicit ArrayStore(Driver& driver) : driver_(driver) {}

  /// Records the chunk grid and placement in the catalog; stores nothing.
  /// Throws DatasetExists, InvalidArgument.
  PartitionMap create_array(const std::string& name, const ArraySpec& spec);
  /// Throws UnknownDataset or InvalidArgument for a table dataset.
  ArraySpec spec(const std::string& name) const;

  template <class T>
  void write_hyperslab(const std::string& name, const Hyperslab& slab, std::span<const T> data);
  template <class T>
  std::vector<T> read_hyperslab(const std::string& name, const Hyperslab& slab);

  const IoStats& stats() const { return stats_; }
  void reset_stats() {
    stats_.chunk_reads = 0;
    stats_.chunk_writes = 0;
  }

 private:
  struct Target {
    ArraySpec spec;
    DatasetInfo info;
  };
  Target target(const std::string& name, ColumnType dtype) const;
  /// Chunk table, or nullopt when the chunk was never written.
  std::optional<Table> fetch_chunk(const ObjectMeta& meta);
  void store_chunk(const ObjectMeta& meta, Table chunk);
  std::mutex& chunk_lock(const ObjectName& name);
  static Hyperslab chunk_box(const ChunkInfo& c) { return Hyperslab{c.origin, c.extents}; }

  template <class T>
  static constexpr ColumnType dtype_of() {
    static_assert(std::is_same_v<T, std::int64_t> || std::is_same_v<T, double>, "array cells are int64 or double");
    return std::is_same_v<T, std::int64_t> ? ColumnType::Int64 : ColumnType::Float64;
  }

  Driver& driver_;
  IoStats stats_;
  std::array<std::mutex, 64> locks_;
};

template <class T>
void ArrayStore::write_hyperslab(const std::string& name, const Hyperslab& slab, std::span<const T> data) {
  Target t = target(name, dtype_of<T>());
  check_slab(t.spec, slab);
  if (data.size() != slab.num_cells()) {
    fail(ErrorCode::LengthMismatch, "slab holds " + std::to_string(slab.num_cells()) + " cells, got " +
                                        std::to_string(data.size()));
  }
  auto chunks = touched_chunks(t.spec, slab);
  driver_.parallel_for(chunks.size(), [&](std::size_t i) {
    ChunkInfo c = chunk_at(t.spec, chunks[i]);
    Hyperslab box = chunk_box(c);
    Hyperslab region = *intersect(box, slab);
    const ObjectMeta& meta = t.info.objects[chunks[i]];
    std::lock_guard lock(chunk_lock(meta.name));
    std::vector<T> cells;
    if (region == box) {
      cells.resize(box.num_cells());
    } else if (auto existing = fetch_chunk(meta)) {
      cells = existing->template column_as<T>(0);
    } else {
      cells.assign(box.num_cells(), T{});
    }
    copy_region<T>(region, slab, data, box, cells);
    Table chunk{t.info.schema};
    chunk.mutable_column(0) = std::move(cells);
    chunk.set_num_rows(box.num_cells());
    store_chunk(meta, std::move(chunk));
  });
}

template <class T>
std::vector<T> ArrayStore::read_hyperslab(const std::string& name, const Hyperslab& slab) {
  Target t = target(name, dtype_of<T>());
  check_slab(t.spec, slab);
  std::vector<T> out(slab.num_cells(), T{});
  auto chunks = touched_chunks(t.spec, slab);
  driver_.parallel_for(chunks.size(), [&](std::size_t i) {
    ChunkInfo c = chunk_at(t.spec, chunks[i]);
    Hyperslab box = chunk_box(c);
    auto existing = fetch_chunk(t.info.objects[chunks[i]]);
    if (!existing) return;  // fill value already in place
    const auto& cells = existing->template column_as<T>(0);
    copy_region<T>(*intersect(box, slab), box, cells, slab, out);
  });
  return out;
}

}  // namespace skyshard
