#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "skyshard/driver.hpp"

namespace skyshard {

struct NodeEntry {
  std::string node_id;
  std::string address;
  std::filesystem::path data_dir;
};

/// JSON file:
///   {"nodes": [{"node_id": "n1", "address": "127.0.0.1:7001", "data_dir": "n1"}],
///    "driver": {"catalog": "catalog.json", "fanout": 16, "listen": "127.0.0.1:7100"}}
/// Relative paths resolve against the file's directory.
struct ClusterConfig {
  std::vector<NodeEntry> nodes;
  std::filesystem::path catalog = "catalog.json";
  std::size_t fanout = 16;
  std::string driver_listen = "127.0.0.1:7100";

  /// Throws BadConfig.
  static ClusterConfig load(const std::filesystem::path& file);
  static ClusterConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  std::string to_json_text() const;

  /// Throws BadConfig.
  const NodeEntry& node(const std::string& node_id) const;
  /// Driver over remote clients for every configured node.
  std::shared_ptr<Driver> connect() const;
};

}  // namespace skyshard
