#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skyshard/aggregate.hpp"
#include "skyshard/bytes.hpp"
#include "skyshard/error.hpp"
#include "skyshard/sealed_object.hpp"
#include "skyshard/storage_node.hpp"

namespace skyshard::wire {

enum class MsgType : std::uint8_t {
  PutObject = 1,
  GetObject = 2,
  Exec = 3,
  BuildIndex = 4,
  LookupIndex = 5,
  Ping = 6,
  SubmitQuery = 7,
  Compress = 8,
};

inline constexpr std::uint8_t kResponseBit = 0x80;
inline constexpr std::uint8_t response_type(std::uint8_t request_type) { return request_type | kResponseBit; }

enum class Status : std::uint8_t {
  Ok = 0,
  NotFound = 1,
  DecodeFailed = 2,
  UnknownColumn = 3,
  TypeMismatch = 4,
  IndexMissing = 5,
  Internal = 6,
  BadRequest = 255,
};

Status status_for(ErrorCode code);

inline constexpr std::size_t kMaxPayload = 64u << 20;
/// length field counts request_id + msg_type + payload.
inline constexpr std::size_t kFrameHeader = 8 + 1;
inline constexpr std::size_t kLengthField = 4;

struct Frame {
  std::uint64_t request_id = 0;
  std::uint8_t msg_type = 0;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws FrameTooLarge when the payload exceeds `max_payload`.
Bytes encode_frame(const Frame& frame, std::size_t max_payload = kMaxPayload);
void encode_frame_into(Bytes& out, const Frame& frame, std::size_t max_payload = kMaxPayload);
/// Exactly one frame. Throws Truncated, FrameTooLarge, or BadRequest on trailing bytes.
Frame decode_frame(ByteView bytes, std::size_t max_payload = kMaxPayload);

/// Incremental stream decoder. An oversized frame is reported once (with the
/// request id and type from its header) and its body is then discarded, so the
/// stream stays in sync.
class FrameDecoder {
 public:
  struct Oversized {
    std::uint64_t request_id;
    std::uint8_t msg_type;
    std::uint64_t length;
  };
  using Event = std::variant<Frame, Oversized>;

  explicit FrameDecoder(std::size_t max_payload = kMaxPayload) : max_payload_(max_payload) {}

  void feed(ByteView data);
  /// Next complete event, if any. Throws BadRequest when a length field is
  /// smaller than the fixed header (the stream cannot be resynchronized).
  std::optional<Event> next();
  /// Bytes buffered but not yet returned.
  std::size_t buffered() const { return buf_.size() - pos_; }
  /// True while skipping the body of an oversized frame.
  bool skipping() const { return skip_ > 0; }

 private:
  void compact();

  std::size_t max_payload_;
  Bytes buf_;
  std::size_t pos_ = 0;
  std::uint64_t skip_ = 0;
};

// Response payloads: status u8, then body. Error bodies are a u8 ErrorCode
// plus a UTF-8 message.
Bytes ok_payload(ByteView body = {});
Bytes error_payload(ErrorCode code, std::string_view message);
Bytes error_payload(Status status, ErrorCode code, std::string_view message);

struct Response {
  Status status = Status::Ok;
  Bytes body;
};
Response split_response(ByteView payload);
/// Returns the body of an OK response; rethrows an error response as Error.
Bytes expect_ok(ByteView payload);

void encode_value(ByteWriter& w, const Value& v);
Value decode_value(ByteReader& r);

// Requests.

struct PutObjectRequest {
  std::string name;  // rendered object name; plain dataset name at the driver
  Bytes object;
  friend bool operator==(const PutObjectRequest&, const PutObjectRequest&) = default;
};

struct GetObjectRequest {
  std::string name;
  friend bool operator==(const GetObjectRequest&, const GetObjectRequest&) = default;
};

struct ExecRequest {
  std::string name;
  std::string sub_query;  // query-text fragment, see to_text(SubQuery)
  friend bool operator==(const ExecRequest&, const ExecRequest&) = default;
};

struct BuildIndexRequest {
  std::string name;
  std::string column;
  friend bool operator==(const BuildIndexRequest&, const BuildIndexRequest&) = default;
};

struct LookupIndexRequest {
  std::string dataset;
  std::string column;
  Value literal;
  friend bool operator==(const LookupIndexRequest&, const LookupIndexRequest&) = default;
};

struct SubmitQueryRequest {
  std::string text;
  friend bool operator==(const SubmitQueryRequest&, const SubmitQueryRequest&) = default;
};

struct CompressRequest {
  std::string name;
  CompressMode mode = CompressMode::Compress;
  friend bool operator==(const CompressRequest&, const CompressRequest&) = default;
};

Bytes encode(const PutObjectRequest& m);
Bytes encode(const GetObjectRequest& m);
Bytes encode(const ExecRequest& m);
Bytes encode(const BuildIndexRequest& m);
Bytes encode(const LookupIndexRequest& m);
Bytes encode(const SubmitQueryRequest& m);
Bytes encode(const CompressRequest& m);

PutObjectRequest decode_put(ByteView p);
GetObjectRequest decode_get(ByteView p);
ExecRequest decode_exec(ByteView p);
BuildIndexRequest decode_build_index(ByteView p);
LookupIndexRequest decode_lookup(ByteView p);
SubmitQueryRequest decode_submit(ByteView p);
CompressRequest decode_compress(ByteView p);

// Response bodies (after the status byte).

/// tag 0: SealedObject bytes of the selected rows in stored order (decoded
/// ordinals are positional); tag 1: PartialAggState.
Bytes encode_exec_result(const ExecResult& r);
ExecResult decode_exec_result(ByteView body);

Bytes encode_index_hits(const std::vector<IndexHit>& hits);
std::vector<IndexHit> decode_index_hits(ByteView body);

using QueryResult = std::variant<Table, Scalar>;
/// tag 0: SealedObject bytes; tag 1: 8-byte LE value + type tag.
Bytes encode_query_result(const QueryResult& r);
QueryResult decode_query_result(ByteView body);

Bytes encode_u64(std::uint64_t v);
std::uint64_t decode_u64(ByteView body);

}  // namespace skyshard::wire
