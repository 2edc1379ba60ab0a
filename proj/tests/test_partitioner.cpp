#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "skyshard/partitioner.hpp"
#include "support.hpp"

using namespace skyshard;

namespace {

Table counting_table(std::size_t n) {
  Table t{Schema({{"id", ColumnType::Int64}})};
  for (std::size_t i = 0; i < n; ++i) t.append_row({Value(static_cast<std::int64_t>(i))});
  return t;
}

std::vector<std::size_t> sizes(const std::vector<Table>& shards) {
  std::vector<std::size_t> out;
  for (const auto& s : shards) out.push_back(s.num_rows());
  return out;
}

std::vector<ObjectName> names(const std::string& ds, std::size_t n) {
  std::vector<ObjectName> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({ds, i});
  return out;
}

}  // namespace

TEST_CASE("partition_table shard sizes") {
  auto p4 = PartitionPolicy::with_target(4);
  CHECK(sizes(partition_table(counting_table(10), p4)) == std::vector<std::size_t>{4, 4, 2});
  CHECK(sizes(partition_table(counting_table(4), p4)) == std::vector<std::size_t>{4});
  CHECK(partition_table(counting_table(0), p4).empty());
  CHECK_THROWS_AS(partition_table(counting_table(3), PartitionPolicy{0, 0}), Error);
  CHECK_THROWS_AS(partition_table(counting_table(3), PartitionPolicy{8, 4}), Error);
}

TEST_CASE("partition_table: concatenation reproduces the input") {
  Table t = counting_table(100000);
  auto shards = partition_table(t, PartitionPolicy{});
  CHECK(shards.size() == 25);
  Table joined{t.schema()};
  for (const auto& s : shards) {
    CHECK(s.num_rows() <= PartitionPolicy{}.max_rows);
    joined.append(s);
  }
  CHECK(joined == t);
}

TEST_CASE("grouping small tables concatenates before splitting") {
  std::vector<Table> parts{counting_table(3), counting_table(2), counting_table(4)};
  auto shards = partition_tables(parts, PartitionPolicy::with_target(4));
  CHECK(sizes(shards) == std::vector<std::size_t>{4, 4, 1});
  CHECK(shards[0].value(3, 0) == Value(std::int64_t{0}));
}

TEST_CASE("chunk_grid enumerations") {
  ArraySpec a{ColumnType::Float64, {100, 100}, {32, 32}};
  auto g = chunk_grid(a);
  REQUIRE(g.size() == 16);
  CHECK(g[3].extents == Extents{32, 4});
  CHECK(g[15].extents == Extents{4, 4});
  CHECK(g[12].coords == Extents{3, 0});

  CHECK(chunk_grid(ArraySpec{ColumnType::Int64, {8}, {8}}).size() == 1);

  // Hand enumeration of a 5x3 array in 2x2 chunks.
  auto small = chunk_grid(ArraySpec{ColumnType::Int64, {5, 3}, {2, 2}});
  std::vector<Extents> expect{{2, 2}, {2, 1}, {2, 2}, {2, 1}, {1, 2}, {1, 1}};
  REQUIRE(small.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(small[i].extents == expect[i]);
    CHECK(chunk_ordinal(ArraySpec{ColumnType::Int64, {5, 3}, {2, 2}}, small[i].coords) == i);
  }

  CHECK_THROWS_AS(chunk_grid(ArraySpec{ColumnType::Int64, {5, 3}, {2}}), Error);
  CHECK_THROWS_AS(chunk_grid(ArraySpec{ColumnType::Int64, {5}, {6}}), Error);
  CHECK_THROWS_AS(chunk_grid(ArraySpec{ColumnType::Utf8, {5}, {5}}), Error);
}

TEST_CASE("chunk grid covers every cell exactly once") {
  testing::Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    ArraySpec spec;
    std::size_t rank = 1 + rng() % 3;
    for (std::size_t d = 0; d < rank; ++d) {
      spec.shape.push_back(1 + rng() % 9);
      spec.chunk_shape.push_back(1 + rng() % spec.shape.back());
    }
    std::vector<int> hits(spec.num_cells(), 0);
    for (const auto& c : chunk_grid(spec)) {
      Extents idx(rank, 0);
      std::uint64_t cells = 1;
      for (auto e : c.extents) cells *= e;
      for (std::uint64_t k = 0; k < cells; ++k) {
        std::uint64_t rem = k, lin = 0;
        for (std::size_t d = rank; d-- > 0;) {
          idx[d] = c.origin[d] + rem % c.extents[d];
          rem /= c.extents[d];
        }
        for (std::size_t d = 0; d < rank; ++d) lin = lin * spec.shape[d] + idx[d];
        ++hits[lin];
      }
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("place_objects") {
  std::vector<std::string> one{"n1"};
  auto map = place_objects(names("t", 20), one);
  CHECK(map.dataset == "t");
  for (const auto& e : map.entries) CHECK(e.node_id == "n1");

  std::vector<std::string> four{"n1", "n2", "n3", "n4"};
  CHECK(place_objects(names("t", 100), four) == place_objects(names("t", 100), four));

  std::vector<std::string> none;
  try {
    place_objects(names("t", 1), none);
    FAIL("expected EmptyNodeSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyNodeSet);
  }
  std::vector<std::string> dup{"a", "a"};
  CHECK_THROWS_AS(place_objects(names("t", 1), dup), Error);
}

TEST_CASE("place_objects balance: 1000 objects over 4 nodes") {
  std::vector<std::string> nodes{"node-0", "node-1", "node-2", "node-3"};
  std::map<std::string, int> counts;
  for (const auto& e : place_objects(names("dataset", 1000), nodes).entries) ++counts[e.node_id];
  REQUIRE(counts.size() == 4);
  for (const auto& [node, n] : counts) {
    CAPTURE(node);
    CHECK(n >= 200);
    CHECK(n <= 300);
  }
}

TEST_CASE("rendezvous minimal disruption (exhaustive small cases)") {
  for (std::size_t nnodes = 2; nnodes <= 5; ++nnodes) {
    std::vector<std::string> nodes;
    for (std::size_t i = 0; i < nnodes; ++i) nodes.push_back("n" + std::to_string(i));
    auto objs = names("ds", 200);
    auto before = place_objects(objs, nodes);
    for (std::size_t removed = 0; removed < nnodes; ++removed) {
      std::vector<std::string> rest;
      for (std::size_t i = 0; i < nnodes; ++i) {
        if (i != removed) rest.push_back(nodes[i]);
      }
      auto after = place_objects(objs, rest);
      for (std::size_t k = 0; k < objs.size(); ++k) {
        if (before.entries[k].node_id != nodes[removed]) CHECK(after.entries[k].node_id == before.entries[k].node_id);
      }
    }
  }
}
