#include "skyshard/driver_service.hpp"

namespace skyshard {

using wire::MsgType;

net::Handler driver_handler(std::shared_ptr<Driver> driver, PartitionPolicy policy) {
  return [driver, policy](std::uint8_t type, ByteView payload) -> Bytes {
    switch (static_cast<MsgType>(type)) {
      case MsgType::Ping: return wire::ok_payload();
      case MsgType::SubmitQuery: {
        auto req = wire::decode_submit(payload);
        return wire::ok_payload(wire::encode_query_result(driver->execute(req.text)));
      }
      case MsgType::PutObject: {
        auto req = wire::decode_put(payload);
        SealedObject obj;
        try {
          obj = decode_object(req.object);
        } catch (const Error& e) {
          fail(ErrorCode::DecodeFailed, std::string("object for '") + req.name + "' does not decode: " + e.what());
        }
        if (obj.kind != ObjectKind::TableShard) fail(ErrorCode::BadRequest, "driver accepts table objects only");
        driver->write_table(req.name, unseal(obj), policy, true);
        return wire::ok_payload();
      }
      case MsgType::GetObject: {
        auto req = wire::decode_get(payload);
        return wire::ok_payload(driver->get_object(ObjectName::parse(req.name)));
      }
      case MsgType::BuildIndex: {
        auto req = wire::decode_build_index(payload);
        return wire::ok_payload(wire::encode_u64(driver->build_index(req.name, req.column)));
      }
      default: fail(ErrorCode::BadRequest, "unknown message type " + std::to_string(type) + " at driver");
    }
  };
}

}  // namespace skyshard
