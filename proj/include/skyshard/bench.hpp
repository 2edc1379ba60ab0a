#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skyshard/driver.hpp"
#include "skyshard/node_client.hpp"

namespace skyshard {

struct BenchRun {
  std::string configuration;
  double seconds = 0;
  std::uint64_t bytes = 0;  // bytes moved, when the benchmark counts them
};

/// Raw timings plus numbers derived from them at output time, so every
/// derived value can be recomputed from the same report.
struct BenchReport {
  std::string benchmark;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<BenchRun> runs;
  std::string baseline;  // configuration the speedups divide by

  /// Throws InvalidArgument.
  const BenchRun& run(const std::string& configuration) const;
  /// time(baseline) / time(configuration).
  double speedup(const std::string& configuration) const;
  /// bytes(configuration) / bytes(baseline).
  double byte_ratio(const std::string& configuration) const;

  std::string to_text() const;
  std::string to_json_text() const;
};

struct MirrorOptions {
  std::uint64_t dataset_bytes = 256ull << 20;
  std::vector<std::size_t> node_counts{1, 2, 4};
  std::uint64_t chunk_bytes = 4ull << 20;
  /// Directory for the native (no forwarding layer) path.
  std::filesystem::path native_dir;
  bool sync_writes = true;
};

/// For each k in node_counts, writes dataset_bytes split evenly over the first
/// k nodes (dataset_bytes/k each, nodes in parallel) as ArrayChunk objects,
/// then times the native path: local encode + atomic file write. Runs are
/// named "forward-k" and "native"; the baseline is "forward-1".
BenchReport mirror_write(const std::vector<std::shared_ptr<NodeClient>>& nodes, const MirrorOptions& options);

struct PushdownOptions {
  std::uint64_t rows = 1000000;
  double selectivity = 0.01;
  std::uint64_t target_rows = kDefaultTargetRows;
  std::uint64_t seed = 1;
  std::string dataset = "pushdown_bench";
};

struct PushdownOutcome {
  BenchReport report;  // runs "fetch" (baseline) and "pushdown"
  bool identical = false;
  std::uint64_t matched_rows = 0;
};

/// Loads a synthetic table, then runs `SELECT * WHERE u < selectivity` with
/// pushdown and with get_object + client-side filtering, counting protocol
/// bytes on every connection.
PushdownOutcome bench_pushdown(const std::vector<std::shared_ptr<RemoteNodeClient>>& nodes,
                               const PushdownOptions& options);

/// Synthetic pushdown table: id i64, u f64 uniform in [0,1), tag utf8.
Table pushdown_table(std::uint64_t rows, std::uint64_t seed);

}  // namespace skyshard
