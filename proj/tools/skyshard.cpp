// skyshard command-line entry point.

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <pthread.h>
#include <random>

#include "skyshard/bench.hpp"
#include "skyshard/config.hpp"
#include "skyshard/csv.hpp"
#include "skyshard/driver_service.hpp"
#include "skyshard/process.hpp"

namespace fs = std::filesystem;
using namespace skyshard;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  bool json_out = false;
};

ClusterConfig require_config(const Globals& g) {
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("SKYSHARD_CONFIG")) path = env;
  }
  if (path.empty()) fail(ErrorCode::BadConfig, "no cluster config: pass --config or set SKYSHARD_CONFIG");
  return ClusterConfig::load(path);
}

std::optional<ClusterConfig> optional_config(const Globals& g) {
  if (g.config_path.empty() && !std::getenv("SKYSHARD_CONFIG")) return std::nullopt;
  return require_config(g);
}

// Blocks termination signals in every thread started after this call, so
// wait_for_termination can collect them synchronously.
sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGINT);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int wait_for_termination(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

json value_json(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::Int64: return std::get<std::int64_t>(v);
    case ColumnType::Float64: return std::get<double>(v);
    case ColumnType::Utf8: return std::get<std::string>(v);
  }
  return nullptr;
}

std::string scratch_dir(const std::string& requested) {
  if (!requested.empty()) {
    fs::create_directories(requested);
    return requested;
  }
  std::random_device rd;
  fs::path p = fs::temp_directory_path() / ("skyshard-bench-" + std::to_string(rd()));
  fs::create_directories(p);
  return p.string();
}

std::string self_exe() { return fs::read_symlink("/proc/self/exe").string(); }

/// Nodes for a benchmark: spawned local processes, or the configured cluster.
struct BenchCluster {
  std::vector<SpawnedNode> children;
  std::vector<NodeEntry> nodes;
};

BenchCluster bench_cluster(const Globals& g, bool spawn, std::size_t count, const std::string& work, bool sync) {
  BenchCluster c;
  if (spawn) {
    for (std::size_t i = 0; i < count; ++i) {
      std::string id = "n" + std::to_string(i + 1);
      c.children.push_back(spawn_node(self_exe(), id, fs::path(work) / id, sync));
      c.nodes.push_back({id, c.children.back().address, fs::path(work) / id});
    }
    return c;
  }
  c.nodes = require_config(g).nodes;
  if (c.nodes.size() < count) {
    fail(ErrorCode::BadConfig, "benchmark needs " + std::to_string(count) + " nodes, config has " +
                                   std::to_string(c.nodes.size()));
  }
  return c;
}

void stop_children(BenchCluster& c) {
  for (auto& n : c.children) n.process.signal(SIGTERM);
  for (auto& n : c.children) n.process.wait();
}

int cmd_node_serve(const Globals& g, std::string node_id, std::string listen, std::string data_dir, bool no_sync) {
  if (auto cfg = optional_config(g); cfg && !node_id.empty()) {
    const NodeEntry& e = cfg->node(node_id);
    if (listen.empty()) listen = e.address;
    if (data_dir.empty()) data_dir = e.data_dir.string();
  }
  if (node_id.empty()) fail(ErrorCode::BadConfig, "--node-id is required");
  if (listen.empty()) fail(ErrorCode::BadConfig, "--listen is required without a config entry");
  if (data_dir.empty()) fail(ErrorCode::BadConfig, "--data-dir is required without a config entry");
  sigset_t set = block_termination_signals();
  NodeConfig nc{node_id, listen, data_dir, !no_sync};
  auto node = std::make_shared<StorageNode>(nc);
  net::FrameServer server(listen, node_handler(node));
  std::cout << "listening " << server.address() << std::endl;
  int sig = wait_for_termination(set);
  server.stop();
  std::cerr << "node " << node_id << " stopped on signal " << sig << "\n";
  return 0;
}

int cmd_driver_serve(const Globals& g, std::string listen, std::uint64_t target_rows) {
  ClusterConfig cfg = require_config(g);
  if (listen.empty()) listen = cfg.driver_listen;
  sigset_t set = block_termination_signals();
  auto driver = cfg.connect();
  net::FrameServer server(listen, driver_handler(driver, PartitionPolicy::with_target(target_rows)));
  std::cout << "listening " << server.address() << std::endl;
  wait_for_termination(set);
  server.stop();
  return 0;
}

int cmd_load_csv(const Globals& g, const std::string& dataset, const std::string& file, std::uint64_t target_rows) {
  ClusterConfig cfg = require_config(g);
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + file);
  Table t = table_from_csv(in);
  auto driver = cfg.connect();
  PartitionMap pm = driver->write_table(dataset, t, PartitionPolicy::with_target(target_rows));
  if (g.json_out) {
    json j{{"dataset", dataset}, {"rows", t.num_rows()}, {"objects", json::array()}};
    for (const auto& e : pm.entries) {
      const auto& r = std::get<RowRange>(e.range);
      j["objects"].push_back({{"name", e.name.render()}, {"node_id", e.node_id}, {"rows", {r.begin, r.end}}});
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << pm.entries.size() << (pm.entries.size() == 1 ? " object" : " objects") << "\n";
  for (const auto& e : pm.entries) {
    const auto& r = std::get<RowRange>(e.range);
    std::cout << e.name.render() << "\t" << e.node_id << "\trows " << r.begin << ".." << r.end << "\n";
  }
  return 0;
}

int cmd_query(const Globals& g, const std::string& text) {
  Query q;
  try {
    q = parse_query(text);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n  " << text << "\n  " << std::string(e.position(), ' ') << "^\n";
    return 2;
  }
  ClusterConfig cfg = require_config(g);
  QueryResult r = cfg.connect()->execute(q);
  if (auto* s = std::get_if<Scalar>(&r)) {
    if (g.json_out) {
      json j;
      j["scalar"] = std::holds_alternative<std::int64_t>(*s) ? json(std::get<std::int64_t>(*s))
                                                              : json(std::get<double>(*s));
      std::cout << j.dump() << "\n";
    } else {
      std::cout << format_scalar(*s) << "\n";
    }
    return 0;
  }
  const Table& t = std::get<Table>(r);
  if (g.json_out) {
    json j{{"columns", json::array()}, {"rows", json::array()}};
    for (const auto& c : t.schema().columns()) j["columns"].push_back({{"name", c.name}, {"type", type_name(c.type)}});
    for (std::size_t row = 0; row < t.num_rows(); ++row) {
      json jr = json::array();
      for (std::size_t c = 0; c < t.num_columns(); ++c) jr.push_back(value_json(t.value(row, c)));
      j["rows"].push_back(std::move(jr));
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << format_table(t);
  }
  return 0;
}

int cmd_index_build(const Globals& g, const std::string& dataset, const std::string& column) {
  auto driver = require_config(g).connect();
  std::uint64_t distinct = driver->build_index(dataset, column);
  std::size_t objects = driver->catalog().get(dataset).objects.size();
  if (g.json_out) {
    std::cout << json{{"dataset", dataset}, {"column", column}, {"objects", objects}, {"distinct_values", distinct}}.dump()
              << "\n";
  } else {
    std::cout << "indexed " << dataset << "." << column << " on " << objects << " objects\n";
  }
  return 0;
}

int cmd_bench_write_scaling(const Globals& g, std::uint64_t size_mb, std::vector<std::size_t> counts,
                            std::uint64_t chunk_mb, bool spawn, const std::string& work_dir, bool no_sync) {
  if (size_mb == 0) fail(ErrorCode::InvalidArgument, "--size-mb must be positive");
  if (chunk_mb == 0) fail(ErrorCode::InvalidArgument, "--chunk-mb must be positive");
  if (counts.empty()) fail(ErrorCode::InvalidArgument, "--node-counts is empty");
  std::size_t max_nodes = *std::max_element(counts.begin(), counts.end());
  std::string work = scratch_dir(work_dir);
  bool owned = work_dir.empty();
  BenchCluster cluster = bench_cluster(g, spawn, max_nodes, work, !no_sync);
  std::vector<std::shared_ptr<NodeClient>> clients;
  for (const auto& n : cluster.nodes) clients.push_back(std::make_shared<RemoteNodeClient>(n.node_id, n.address));
  MirrorOptions o;
  o.dataset_bytes = size_mb << 20;
  o.node_counts = counts;
  o.chunk_bytes = chunk_mb << 20;
  o.native_dir = fs::path(work) / "native";
  o.sync_writes = !no_sync;
  BenchReport report = mirror_write(clients, o);
  report.parameters.push_back({"node_processes", spawn ? "spawned" : "configured"});
  clients.clear();
  stop_children(cluster);
  if (owned) fs::remove_all(work);
  std::cout << (g.json_out ? report.to_json_text() + "\n" : report.to_text());
  return 0;
}

int cmd_bench_pushdown(const Globals& g, std::uint64_t rows, double selectivity, std::uint64_t target_rows,
                       std::size_t nodes, bool spawn, const std::string& work_dir) {
  std::string work = scratch_dir(work_dir);
  bool owned = work_dir.empty();
  BenchCluster cluster = bench_cluster(g, spawn, spawn ? nodes : 1, work, false);
  std::vector<std::shared_ptr<RemoteNodeClient>> clients;
  for (const auto& n : cluster.nodes) clients.push_back(std::make_shared<RemoteNodeClient>(n.node_id, n.address));
  PushdownOptions o;
  o.rows = rows;
  o.selectivity = selectivity;
  o.target_rows = target_rows;
  PushdownOutcome out = bench_pushdown(clients, o);
  clients.clear();
  stop_children(cluster);
  if (owned) fs::remove_all(work);
  std::cout << (g.json_out ? out.report.to_json_text() + "\n" : out.report.to_text());
  return out.identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skyshard: sharded storage with query pushdown"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Cluster config file (or SKYSHARD_CONFIG)");
  app.add_flag("--json", g.json_out, "Structured output");

  std::function<int()> action;

  auto* node = app.add_subcommand("node", "Storage node commands")->require_subcommand(1);
  auto* node_serve = node->add_subcommand("serve", "Run a storage node");
  std::string node_id, listen, data_dir;
  bool no_sync = false;
  node_serve->add_option("--node-id", node_id);
  node_serve->add_option("--listen", listen, "host:port; port 0 picks a free port");
  node_serve->add_option("--data-dir", data_dir);
  node_serve->add_flag("--no-sync", no_sync, "Skip fsync before acknowledging puts");
  node_serve->callback([&] { action = [&] { return cmd_node_serve(g, node_id, listen, data_dir, no_sync); }; });

  auto* drv = app.add_subcommand("driver", "Driver service commands")->require_subcommand(1);
  auto* drv_serve = drv->add_subcommand("serve", "Serve SUBMIT_QUERY over the wire protocol");
  std::string drv_listen;
  std::uint64_t drv_target = kDefaultTargetRows;
  drv_serve->add_option("--listen", drv_listen);
  drv_serve->add_option("--target-rows", drv_target, "Partition target for PUT_OBJECT loads")->check(CLI::PositiveNumber);
  drv_serve->callback([&] { action = [&] { return cmd_driver_serve(g, drv_listen, drv_target); }; });

  auto* load = app.add_subcommand("load-csv", "Load a CSV file as a table dataset");
  std::string dataset, file;
  std::uint64_t target_rows = kDefaultTargetRows;
  load->add_option("dataset", dataset)->required();
  load->add_option("file", file)->required();
  load->add_option("--target-rows", target_rows)->check(CLI::PositiveNumber);
  load->callback([&] { action = [&] { return cmd_load_csv(g, dataset, file, target_rows); }; });

  auto* query = app.add_subcommand("query", "Run a query");
  std::string text;
  query->add_option("text", text)->required();
  query->callback([&] { action = [&] { return cmd_query(g, text); }; });

  auto* index = app.add_subcommand("index", "Secondary index commands")->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Build a column index on every object of a dataset");
  std::string column;
  index_build->add_option("dataset", dataset)->required();
  index_build->add_option("column", column)->required();
  index_build->callback([&] { action = [&] { return cmd_index_build(g, dataset, column); }; });

  auto* bench = app.add_subcommand("bench", "Benchmarks")->require_subcommand(1);
  bool spawn = false;
  std::string work_dir;

  auto* ws = bench->add_subcommand("write-scaling", "Mirror-write a dataset over 1..k nodes and natively");
  std::uint64_t size_mb = 256, chunk_mb = 4;
  std::vector<std::size_t> counts{1, 2, 4};
  ws->add_option("--size-mb", size_mb);
  ws->add_option("--chunk-mb", chunk_mb);
  ws->add_option("--node-counts", counts)->delimiter(',');
  ws->add_flag("--spawn", spawn, "Start local node processes instead of using the config");
  ws->add_option("--work-dir", work_dir, "Data directories for spawned nodes and the native path");
  ws->add_flag("--no-sync", no_sync);
  ws->callback([&] {
    action = [&] { return cmd_bench_write_scaling(g, size_mb, counts, chunk_mb, spawn, work_dir, no_sync); };
  });

  auto* pd = bench->add_subcommand("pushdown", "Filter with pushdown versus fetch-then-filter");
  std::uint64_t rows = 1000000, pd_target = kDefaultTargetRows;
  double selectivity = 0.01;
  std::size_t pd_nodes = 2;
  pd->add_option("--rows", rows)->check(CLI::PositiveNumber);
  pd->add_option("--selectivity", selectivity)->check(CLI::Range(0.0, 1.0));
  pd->add_option("--target-rows", pd_target)->check(CLI::PositiveNumber);
  pd->add_option("--nodes", pd_nodes, "Spawned node count")->check(CLI::PositiveNumber);
  pd->add_flag("--spawn", spawn);
  pd->add_option("--work-dir", work_dir);
  pd->callback([&] {
    action = [&] { return cmd_bench_pushdown(g, rows, selectivity, pd_target, pd_nodes, spawn, work_dir); };
  });

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
