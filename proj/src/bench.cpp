#include "skyshard/bench.hpp"

#include <chrono>
#include <cstdio>
#include <json.hpp>
#include <random>
#include <thread>

namespace skyshard {

const BenchRun& BenchReport::run(const std::string& configuration) const {
  for (const auto& r : runs) {
    if (r.configuration == configuration) return r;
  }
  fail(ErrorCode::InvalidArgument, "no run named '" + configuration + "'");
}

double BenchReport::speedup(const std::string& configuration) const {
  return run(baseline).seconds / run(configuration).seconds;
}

double BenchReport::byte_ratio(const std::string& configuration) const {
  return static_cast<double>(run(configuration).bytes) / static_cast<double>(run(baseline).bytes);
}

std::string BenchReport::to_text() const {
  std::string out = "benchmark " + benchmark + "\n";
  for (const auto& [k, v] : parameters) out += "  " + k + " = " + v + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %12s %14s %9s\n", "configuration", "seconds", "bytes", "speedup");
  out += line;
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%-16s %12.4f %14llu %9.3f\n", r.configuration.c_str(), r.seconds,
                  static_cast<unsigned long long>(r.bytes), speedup(r.configuration));
    out += line;
  }
  out += "speedup = seconds(" + baseline + ") / seconds(configuration)\n";
  return out;
}

std::string BenchReport::to_json_text() const {
  nlohmann::json j;
  j["benchmark"] = benchmark;
  j["parameters"] = nlohmann::json::object();
  for (const auto& [k, v] : parameters) j["parameters"][k] = v;
  j["baseline"] = baseline;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json rj{{"configuration", r.configuration},
                      {"seconds", r.seconds},
                      {"bytes", r.bytes},
                      {"speedup", speedup(r.configuration)}};
    if (run(baseline).bytes > 0) rj["byte_ratio"] = byte_ratio(r.configuration);
    j["runs"].push_back(std::move(rj));
  }
  return j.dump(2);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Bytes mirror_chunk(std::uint64_t cells, std::uint64_t seed) {
  Table t{Schema({{"v", ColumnType::Float64}})};
  std::vector<double> v(cells);
  for (std::uint64_t i = 0; i < cells; ++i) v[i] = static_cast<double>(seed + i) * 0.5;
  t.mutable_column(0) = std::move(v);
  t.set_num_rows(cells);
  return encode_object(seal(t, ObjectKind::ArrayChunk));
}

// Writes `bytes` worth of chunks to one node; chunk m gets partition base + m.
void write_share(NodeClient& node, std::uint64_t bytes, std::uint64_t chunk_bytes, std::uint64_t base) {
  std::uint64_t m = 0;
  for (std::uint64_t done = 0; done < bytes; done += chunk_bytes, ++m) {
    std::uint64_t cells = std::max<std::uint64_t>(1, std::min(chunk_bytes, bytes - done) / 8);
    node.put_object(ObjectName{"mirror", base + m}, mirror_chunk(cells, base + m));
  }
}

}  // namespace

BenchReport mirror_write(const std::vector<std::shared_ptr<NodeClient>>& nodes, const MirrorOptions& o) {
  if (o.dataset_bytes == 0) fail(ErrorCode::InvalidArgument, "dataset size must be positive");
  if (o.chunk_bytes < 8) fail(ErrorCode::InvalidArgument, "chunk size must hold at least one cell");
  if (o.node_counts.empty()) fail(ErrorCode::InvalidArgument, "no node counts given");
  for (auto k : o.node_counts) {
    if (k == 0 || k > nodes.size()) {
      fail(ErrorCode::InvalidArgument, "node count " + std::to_string(k) + " outside 1.." + std::to_string(nodes.size()));
    }
  }
  if (o.native_dir.empty()) fail(ErrorCode::InvalidArgument, "native path needs a directory");

  BenchReport report;
  report.benchmark = "write-scaling";
  report.parameters = {{"dataset_bytes", std::to_string(o.dataset_bytes)},
                       {"chunk_bytes", std::to_string(o.chunk_bytes)},
                       {"sync_writes", o.sync_writes ? "true" : "false"}};
  report.baseline = "forward-1";
  if (std::find(o.node_counts.begin(), o.node_counts.end(), 1) == o.node_counts.end()) {
    report.baseline = "forward-" + std::to_string(o.node_counts.front());
  }

  for (auto k : o.node_counts) {
    std::uint64_t share = o.dataset_bytes / k;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(k);
    auto t0 = Clock::now();
    for (std::size_t j = 0; j < k; ++j) {
      std::uint64_t bytes = j + 1 == k ? o.dataset_bytes - share * (k - 1) : share;
      threads.emplace_back([&, j, bytes] {
        try {
          write_share(*nodes[j], bytes, o.chunk_bytes, j * 100000);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    double secs = seconds_since(t0);
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    report.runs.push_back({"forward-" + std::to_string(k), secs, o.dataset_bytes});
  }

  NodeConfig local;
  local.node_id = "native";
  local.data_dir = o.native_dir;
  local.sync_writes = o.sync_writes;
  auto native = std::make_shared<StorageNode>(local);
  LocalNodeClient client(native);
  auto t0 = Clock::now();
  write_share(client, o.dataset_bytes, o.chunk_bytes, 0);
  report.runs.push_back({"native", seconds_since(t0), o.dataset_bytes});
  return report;
}

Table pushdown_table(std::uint64_t rows, std::uint64_t seed) {
  Table t{Schema({{"id", ColumnType::Int64}, {"u", ColumnType::Float64}, {"tag", ColumnType::Utf8}})};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::int64_t> id(rows);
  std::vector<double> u(rows);
  std::vector<std::string> tag(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    id[i] = static_cast<std::int64_t>(i);
    u[i] = unit(rng);
    tag[i] = "tag-" + std::to_string(i % 1000);
  }
  t.mutable_column(0) = std::move(id);
  t.mutable_column(1) = std::move(u);
  t.mutable_column(2) = std::move(tag);
  t.set_num_rows(rows);
  return t;
}

PushdownOutcome bench_pushdown(const std::vector<std::shared_ptr<RemoteNodeClient>>& nodes, const PushdownOptions& o) {
  if (o.rows == 0) fail(ErrorCode::InvalidArgument, "row count must be positive");
  if (!(o.selectivity >= 0.0 && o.selectivity <= 1.0)) fail(ErrorCode::InvalidArgument, "selectivity must lie in [0, 1]");
  std::vector<std::shared_ptr<NodeClient>> clients(nodes.begin(), nodes.end());
  Driver driver(clients, std::make_shared<Catalog>());
  driver.write_table(o.dataset, pushdown_table(o.rows, o.seed), PartitionPolicy::with_target(o.target_rows));

  auto traffic = [&] {
    std::uint64_t n = 0;
    for (const auto& c : nodes) n += c->connection().bytes_sent() + c->connection().bytes_received();
    return n;
  };
  auto reset = [&] {
    for (const auto& c : nodes) c->connection().reset_counters();
  };

  // u lies in [0, 1), so selectivity 1 selects every row.
  Query q{o.dataset, Projection::star(), Predicate::compare("u", CompareOp::Lt, Value(o.selectivity)), std::nullopt};

  reset();
  auto t0 = Clock::now();
  Table pushed = std::get<Table>(driver.execute(q));
  double push_secs = seconds_since(t0);
  std::uint64_t push_bytes = traffic();

  reset();
  t0 = Clock::now();
  DatasetInfo info = driver.catalog().get(o.dataset);
  std::vector<Table> parts(info.objects.size());
  Predicate bound = bind(q.predicate, info.schema);
  driver.parallel_for(info.objects.size(), [&](std::size_t i) {
    Table t = unseal(decode_object(driver.get_object(info.objects[i].name)));
    parts[i] = t.take(filter_rows(bound, t));
  });
  Table fetched(info.schema);
  for (const auto& p : parts) fetched.append(p);
  double fetch_secs = seconds_since(t0);
  std::uint64_t fetch_bytes = traffic();

  PushdownOutcome out;
  out.identical = pushed == fetched;
  out.matched_rows = pushed.num_rows();
  out.report.benchmark = "pushdown";
  out.report.parameters = {{"rows", std::to_string(o.rows)},
                           {"selectivity", format_double(o.selectivity)},
                           {"objects", std::to_string(info.objects.size())},
                           {"matched_rows", std::to_string(out.matched_rows)},
                           {"results_identical", out.identical ? "true" : "false"}};
  out.report.baseline = "fetch";
  out.report.runs = {{"fetch", fetch_secs, fetch_bytes}, {"pushdown", push_secs, push_bytes}};
  return out;
}

}  // namespace skyshard
