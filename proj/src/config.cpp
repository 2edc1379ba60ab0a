#include "skyshard/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace skyshard {

using nlohmann::json;

ClusterConfig ClusterConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::BadConfig, "cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), file.parent_path());
}

ClusterConfig ClusterConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  ClusterConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    json j = json::parse(text);
    std::set<std::string> seen;
    for (const auto& n : j.at("nodes")) {
      NodeEntry e;
      e.node_id = n.at("node_id").get<std::string>();
      e.address = n.at("address").get<std::string>();
      e.data_dir = resolve(n.value("data_dir", e.node_id));
      if (e.node_id.empty()) fail(ErrorCode::BadConfig, "empty node_id");
      if (!seen.insert(e.node_id).second) fail(ErrorCode::BadConfig, "duplicate node_id '" + e.node_id + "'");
      c.nodes.push_back(std::move(e));
    }
    if (j.contains("driver")) {
      const auto& d = j["driver"];
      c.catalog = resolve(d.value("catalog", std::string("catalog.json")));
      c.fanout = d.value("fanout", std::size_t{16});
      c.driver_listen = d.value("listen", c.driver_listen);
      if (c.fanout == 0) fail(ErrorCode::BadConfig, "driver.fanout must be positive");
    } else {
      c.catalog = resolve("catalog.json");
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::BadConfig, std::string("bad config: ") + e.what());
  }
  return c;
}

std::string ClusterConfig::to_json_text() const {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : nodes) {
    j["nodes"].push_back({{"node_id", n.node_id}, {"address", n.address}, {"data_dir", n.data_dir.string()}});
  }
  j["driver"] = {{"catalog", catalog.string()}, {"fanout", fanout}, {"listen", driver_listen}};
  return j.dump(2);
}

const NodeEntry& ClusterConfig::node(const std::string& node_id) const {
  for (const auto& n : nodes) {
    if (n.node_id == node_id) return n;
  }
  fail(ErrorCode::BadConfig, "node '" + node_id + "' is not in the config");
}

std::shared_ptr<Driver> ClusterConfig::connect() const {
  std::vector<std::shared_ptr<NodeClient>> clients;
  for (const auto& n : nodes) clients.push_back(std::make_shared<RemoteNodeClient>(n.node_id, n.address));
  DriverOptions opts;
  opts.fanout = fanout;
  return std::make_shared<Driver>(std::move(clients), std::make_shared<Catalog>(catalog), opts);
}

}  // namespace skyshard
