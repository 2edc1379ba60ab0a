#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "skyshard/net.hpp"
#include "skyshard/storage_node.hpp"

namespace skyshard {

/// What the driver needs from one storage node. Errors surface as Error with
/// the node-side code; transport failures as NodeUnreachable.
class NodeClient {
 public:
  virtual ~NodeClient() = default;
  virtual const std::string& node_id() const = 0;
  virtual void put_object(const ObjectName& name, ByteView data) = 0;
  virtual Bytes get_object(const ObjectName& name) = 0;
  virtual ExecResult exec(const ObjectName& name, const SubQuery& sq) = 0;
  virtual std::size_t build_index(const ObjectName& name, const std::string& column) = 0;
  virtual std::vector<IndexHit> lookup_index(const std::string& dataset, const std::string& column,
                                             const Value& value) = 0;
  virtual bool compress_object(const ObjectName& name, CompressMode mode) = 0;
  virtual void ping() = 0;
};

/// In-process node, no serialization.
class LocalNodeClient : public NodeClient {
 public:
  explicit LocalNodeClient(std::shared_ptr<StorageNode> node) : node_(std::move(node)) {}
  const std::string& node_id() const override { return node_->node_id(); }
  void put_object(const ObjectName& name, ByteView data) override { node_->put_object(name, data); }
  Bytes get_object(const ObjectName& name) override { return node_->get_object(name); }
  ExecResult exec(const ObjectName& name, const SubQuery& sq) override { return node_->exec_extension(name, sq); }
  std::size_t build_index(const ObjectName& name, const std::string& column) override {
    return node_->build_index(name, column);
  }
  std::vector<IndexHit> lookup_index(const std::string& dataset, const std::string& column,
                                     const Value& value) override {
    return node_->lookup_index(dataset, column, value);
  }
  bool compress_object(const ObjectName& name, CompressMode mode) override {
    return node_->compress_object(name, mode);
  }
  void ping() override {}
  StorageNode& node() { return *node_; }

 private:
  std::shared_ptr<StorageNode> node_;
};

/// Node reached over the wire protocol.
class RemoteNodeClient : public NodeClient {
 public:
  RemoteNodeClient(std::string node_id, std::string address);
  const std::string& node_id() const override { return node_id_; }
  void put_object(const ObjectName& name, ByteView data) override;
  Bytes get_object(const ObjectName& name) override;
  ExecResult exec(const ObjectName& name, const SubQuery& sq) override;
  std::size_t build_index(const ObjectName& name, const std::string& column) override;
  std::vector<IndexHit> lookup_index(const std::string& dataset, const std::string& column,
                                     const Value& value) override;
  bool compress_object(const ObjectName& name, CompressMode mode) override;
  void ping() override;

  net::Connection& connection() { return conn_; }

 private:
  Bytes call(wire::MsgType type, ByteView payload);

  std::string node_id_;
  net::Connection conn_;
};

/// Test wrapper: fails selected calls with NodeUnreachable before they reach the node.
class FaultyNodeClient : public NodeClient {
 public:
  enum class Op { Put, Get, Exec, BuildIndex, Lookup, Compress, Ping };
  /// Returns true when this call should fail.
  using Rule = std::function<bool(Op op, const std::string& object)>;

  FaultyNodeClient(std::shared_ptr<NodeClient> inner, Rule rule) : inner_(std::move(inner)), rule_(std::move(rule)) {}
  /// Fails the first `n` calls of `op`.
  static Rule fail_first(Op op, int n);
  static Rule always_fail();

  const std::string& node_id() const override { return inner_->node_id(); }
  void put_object(const ObjectName& name, ByteView data) override;
  Bytes get_object(const ObjectName& name) override;
  ExecResult exec(const ObjectName& name, const SubQuery& sq) override;
  std::size_t build_index(const ObjectName& name, const std::string& column) override;
  std::vector<IndexHit> lookup_index(const std::string& dataset, const std::string& column,
                                     const Value& value) override;
  bool compress_object(const ObjectName& name, CompressMode mode) override;
  void ping() override;

  std::size_t injected() const { return injected_.load(); }

 private:
  void check(Op op, const std::string& object);

  std::shared_ptr<NodeClient> inner_;
  Rule rule_;
  std::mutex mu_;
  std::atomic<std::size_t> injected_{0};
};

/// Wire handler of a storage node process.
net::Handler node_handler(std::shared_ptr<StorageNode> node);

}  // namespace skyshard
