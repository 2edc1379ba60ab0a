#include "cluster.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <thread>

namespace skyshard::testing {

namespace fs = std::filesystem;

ProcessCluster::ProcessCluster(std::string exe, fs::path dir, std::size_t n, bool sync_writes)
    : exe_(std::move(exe)), dir_(std::move(dir)), config_(dir_ / "cluster.json") {
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "n" + std::to_string(i + 1);
    nodes_.push_back(spawn_node(exe_, id, dir_ / id, sync_writes));
  }
  write_config();
}

void ProcessCluster::write_config() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes_) {
    j["nodes"].push_back({{"node_id", n.node_id}, {"address", n.address}, {"data_dir", n.node_id}});
  }
  j["driver"] = {{"catalog", "catalog.json"}, {"fanout", 8}};
  std::ofstream(config_) << j.dump(2);
}

std::vector<std::shared_ptr<RemoteNodeClient>> ProcessCluster::remote_clients() const {
  std::vector<std::shared_ptr<RemoteNodeClient>> out;
  for (const auto& n : nodes_) out.push_back(std::make_shared<RemoteNodeClient>(n.node_id, n.address));
  return out;
}

std::pair<int, std::string> ProcessCluster::cli(std::vector<std::string> args) const {
  args.insert(args.begin(), {exe_, "--config", config_.string()});
  return run_process(args, true);
}

namespace {

Bytes crash_payload(std::size_t writer, std::size_t seq) {
  Table t{Schema({{"w", ColumnType::Int64}, {"s", ColumnType::Int64}, {"pad", ColumnType::Utf8}})};
  std::size_t rows = 1 + (writer * 131 + seq * 17) % 300;
  for (std::size_t r = 0; r < rows; ++r) {
    t.append_row({Value(static_cast<std::int64_t>(writer)), Value(static_cast<std::int64_t>(seq * 1000 + r)),
                  Value(std::string(1 + r % 40, static_cast<char>('a' + seq % 26)))});
  }
  return encode_object(seal(t));
}

}  // namespace

CrashOutcome crash_restart_trial(const std::string& exe, const fs::path& dir, int sig, std::size_t writers,
                                 std::size_t kill_after_acks) {
  CrashOutcome out;
  SpawnedNode node = spawn_node(exe, "n1", dir / "n1", true);
  std::mutex mu;
  std::map<std::string, Bytes> attempted, acked;
  std::atomic<bool> stop{false};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < writers; ++w) {
    threads.emplace_back([&, w] {
      RemoteNodeClient client("n1", node.address);
      for (std::size_t seq = 0; !stop; ++seq) {
        ObjectName name{"crash" + std::to_string(w), seq};
        Bytes data = crash_payload(w, seq);
        {
          std::lock_guard lock(mu);
          attempted[name.render()] = data;
        }
        try {
          client.put_object(name, data);
        } catch (const Error&) {
          return;  // node is gone
        }
        std::lock_guard lock(mu);
        acked[name.render()] = std::move(data);
      }
    });
  }
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  for (;;) {
    {
      std::lock_guard lock(mu);
      if (acked.size() >= kill_after_acks) break;
    }
    if (std::chrono::steady_clock::now() > deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  node.process.signal(sig);
  int status = node.process.wait();
  stop = true;
  for (auto& t : threads) t.join();
  out.attempted = attempted.size();
  out.acked = acked.size();
  if (sig == SIGTERM && status != 0) {
    out.failure = "node exited with status " + std::to_string(status) + " on SIGTERM";
    return out;
  }
  if (acked.size() < kill_after_acks) {
    out.failure = "only " + std::to_string(acked.size()) + " puts acknowledged before the deadline";
    return out;
  }

  SpawnedNode again = spawn_node(exe, "n1", dir / "n1", true);
  RemoteNodeClient client("n1", again.address);
  for (const auto& [rendered, data] : attempted) {
    ObjectName name = ObjectName::parse(rendered);
    Bytes got;
    try {
      got = client.get_object(name);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotFound && !acked.count(rendered)) continue;
      out.failure = "acknowledged object " + rendered + " lost: " + e.what();
      return out;
    }
    ++out.present_after_restart;
    if (got != data) {
      out.failure = "object " + rendered + " came back with different bytes";
      return out;
    }
  }
  again.process.signal(SIGTERM);
  again.process.wait();
  return out;
}

}  // namespace skyshard::testing
