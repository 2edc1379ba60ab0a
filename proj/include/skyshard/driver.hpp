#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "skyshard/catalog.hpp"
#include "skyshard/node_client.hpp"
#include "skyshard/protocol.hpp"

namespace skyshard {

using QueryResult = wire::QueryResult;

struct DriverOptions {
  std::size_t fanout = 16;
  /// Planner optimizations; disabling them never changes results.
  bool use_index = true;
  bool use_zone_maps = true;
};

struct PlanEntry {
  std::string node_id;
  ObjectName name;
  SubQuery sub_query;
};

struct Plan {
  std::vector<PlanEntry> entries;
  std::size_t total_objects = 0;
  std::size_t pruned_by_index = 0;
  std::size_t pruned_by_zone_map = 0;
};

struct PartialResult {
  std::uint64_t partition_index = 0;
  ExecResult result;
};

struct QueryStats {
  std::size_t rounds = 0;
  std::size_t sub_queries = 0;
  std::size_t retries = 0;
  std::size_t total_objects = 0;
  std::size_t pruned_by_index = 0;
  std::size_t pruned_by_zone_map = 0;
};

/// Orders parts by (partition_index, ordinal) and concatenates. Throws SchemaMismatch.
Table merge_select(std::vector<std::pair<std::uint64_t, RowsResult>> parts, const Schema& empty_schema);

/// Schema of a projection over `schema`.
Schema projected_schema(const Schema& schema, const Projection& projection);

class Driver {
 public:
  Driver(std::vector<std::shared_ptr<NodeClient>> nodes, std::shared_ptr<Catalog> catalog, DriverOptions options = {});

  const DriverOptions& options() const { return options_; }
  void set_options(const DriverOptions& o) { options_ = o; }
  Catalog& catalog() { return *catalog_; }
  std::vector<std::string> node_ids() const;
  /// Throws InvalidArgument for an unknown node id.
  NodeClient& node(const std::string& node_id);

  /// Shards, places and stores `table`; all-or-error. Throws DatasetExists
  /// unless `overwrite`, NodeUnreachable after one retry per object.
  PartitionMap write_table(const std::string& dataset, const Table& table, const PartitionPolicy& policy = {},
                           bool overwrite = true);

  /// Sub-queries for `q` after index and zone-map elimination. Throws
  /// UnknownDataset, UnknownColumn, TypeMismatch.
  Plan plan(const Query& q, const std::optional<HistogramParams>& histogram = std::nullopt);
  /// Runs every entry, retrying each failure once. Throws SubQueryFailed.
  std::vector<PartialResult> dispatch(const Plan& plan, QueryStats* stats = nullptr);

  QueryResult execute(const Query& q, QueryStats* stats = nullptr);
  /// Parses then executes.
  QueryResult execute(std::string_view text, QueryStats* stats = nullptr);

  /// Builds the node-local index of `column` on every object of `dataset`.
  /// Returns the summed per-object distinct-value counts.
  std::uint64_t build_index(const std::string& dataset, const std::string& column);
  /// Fetches the raw stored object.
  Bytes get_object(const ObjectName& name);
  /// Applies compress/decompress to every object of `dataset`.
  void compress_dataset(const std::string& dataset, CompressMode mode);

  /// Runs fn(i) for i in [0, n) with at most `fanout` in flight; rethrows the first failure.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const;

 private:
  Table run_select(const Query& q, const DatasetInfo& info, QueryStats& stats);
  Scalar run_aggregate(const Query& q, const DatasetInfo& info, QueryStats& stats);
  std::vector<PartialResult> run_round(const Query& q, const std::optional<HistogramParams>& h, QueryStats& stats);

  std::map<std::string, std::shared_ptr<NodeClient>> nodes_;
  std::shared_ptr<Catalog> catalog_;
  DriverOptions options_;
};

}  // namespace skyshard
