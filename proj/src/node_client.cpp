#include "skyshard/node_client.hpp"

namespace skyshard {

using wire::MsgType;

RemoteNodeClient::RemoteNodeClient(std::string node_id, std::string address)
    : node_id_(std::move(node_id)), conn_(std::move(address)) {}

Bytes RemoteNodeClient::call(MsgType type, ByteView payload) {
  return wire::expect_ok(conn_.call(static_cast<std::uint8_t>(type), payload));
}

void RemoteNodeClient::put_object(const ObjectName& name, ByteView data) {
  wire::PutObjectRequest req{name.render(), Bytes(data.begin(), data.end())};
  call(MsgType::PutObject, wire::encode(req));
}

Bytes RemoteNodeClient::get_object(const ObjectName& name) {
  return call(MsgType::GetObject, wire::encode(wire::GetObjectRequest{name.render()}));
}

ExecResult RemoteNodeClient::exec(const ObjectName& name, const SubQuery& sq) {
  wire::ExecRequest req{name.render(), to_text(sq, name.dataset)};
  return wire::decode_exec_result(call(MsgType::Exec, wire::encode(req)));
}

std::size_t RemoteNodeClient::build_index(const ObjectName& name, const std::string& column) {
  return wire::decode_u64(call(MsgType::BuildIndex, wire::encode(wire::BuildIndexRequest{name.render(), column})));
}

std::vector<IndexHit> RemoteNodeClient::lookup_index(const std::string& dataset, const std::string& column,
                                                     const Value& value) {
  return wire::decode_index_hits(call(MsgType::LookupIndex, wire::encode(wire::LookupIndexRequest{dataset, column, value})));
}

bool RemoteNodeClient::compress_object(const ObjectName& name, CompressMode mode) {
  Bytes body = call(MsgType::Compress, wire::encode(wire::CompressRequest{name.render(), mode}));
  ByteReader r(body);
  return r.u8("already") != 0;
}

void RemoteNodeClient::ping() { call(MsgType::Ping, {}); }

FaultyNodeClient::Rule FaultyNodeClient::fail_first(Op op, int n) {
  auto left = std::make_shared<int>(n);
  return [op, left](Op o, const std::string&) {
    if (o != op || *left <= 0) return false;
    --*left;
    return true;
  };
}

FaultyNodeClient::Rule FaultyNodeClient::always_fail() {
  return [](Op, const std::string&) { return true; };
}

void FaultyNodeClient::check(Op op, const std::string& object) {
  bool hit;
  {
    std::lock_guard lock(mu_);
    hit = rule_(op, object);
  }
  if (hit) {
    ++injected_;
    fail(ErrorCode::NodeUnreachable, "injected failure at node " + node_id() + " for " + object);
  }
}

void FaultyNodeClient::put_object(const ObjectName& name, ByteView data) {
  check(Op::Put, name.render());
  inner_->put_object(name, data);
}

Bytes FaultyNodeClient::get_object(const ObjectName& name) {
  check(Op::Get, name.render());
  return inner_->get_object(name);
}

ExecResult FaultyNodeClient::exec(const ObjectName& name, const SubQuery& sq) {
  check(Op::Exec, name.render());
  return inner_->exec(name, sq);
}

std::size_t FaultyNodeClient::build_index(const ObjectName& name, const std::string& column) {
  check(Op::BuildIndex, name.render());
  return inner_->build_index(name, column);
}

std::vector<IndexHit> FaultyNodeClient::lookup_index(const std::string& dataset, const std::string& column,
                                                     const Value& value) {
  check(Op::Lookup, dataset);
  return inner_->lookup_index(dataset, column, value);
}

bool FaultyNodeClient::compress_object(const ObjectName& name, CompressMode mode) {
  check(Op::Compress, name.render());
  return inner_->compress_object(name, mode);
}

void FaultyNodeClient::ping() {
  check(Op::Ping, "");
  inner_->ping();
}

net::Handler node_handler(std::shared_ptr<StorageNode> node) {
  return [node](std::uint8_t type, ByteView payload) -> Bytes {
    switch (static_cast<MsgType>(type)) {
      case MsgType::Ping: return wire::ok_payload();
      case MsgType::PutObject: {
        auto req = wire::decode_put(payload);
        node->put_object(ObjectName::parse(req.name), req.object);
        return wire::ok_payload();
      }
      case MsgType::GetObject: {
        auto req = wire::decode_get(payload);
        return wire::ok_payload(node->get_object(ObjectName::parse(req.name)));
      }
      case MsgType::Exec: {
        auto req = wire::decode_exec(payload);
        ObjectName name = ObjectName::parse(req.name);
        auto [dataset, sq] = parse_sub_query(req.sub_query);
        if (dataset != name.dataset) fail(ErrorCode::BadRequest, "sub-query dataset differs from object name");
        return wire::ok_payload(wire::encode_exec_result(node->exec_extension(name, sq)));
      }
      case MsgType::BuildIndex: {
        auto req = wire::decode_build_index(payload);
        return wire::ok_payload(wire::encode_u64(node->build_index(ObjectName::parse(req.name), req.column)));
      }
      case MsgType::LookupIndex: {
        auto req = wire::decode_lookup(payload);
        return wire::ok_payload(wire::encode_index_hits(node->lookup_index(req.dataset, req.column, req.literal)));
      }
      case MsgType::Compress: {
        auto req = wire::decode_compress(payload);
        bool already = node->compress_object(ObjectName::parse(req.name), req.mode);
        Bytes body{static_cast<std::uint8_t>(already ? 1 : 0)};
        return wire::ok_payload(body);
      }
      default: fail(ErrorCode::BadRequest, "unknown message type " + std::to_string(type));
    }
  };
}

}  // namespace skyshard
