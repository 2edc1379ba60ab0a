#include "skyshard/protocol.hpp"

#include <cstring>
#include <numeric>

namespace skyshard::wire {

Status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDataset: return Status::NotFound;
    case ErrorCode::DecodeFailed:
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::SchemaParse: return Status::DecodeFailed;
    case ErrorCode::UnknownColumn: return Status::UnknownColumn;
    case ErrorCode::TypeMismatch: return Status::TypeMismatch;
    case ErrorCode::IndexMissing: return Status::IndexMissing;
    case ErrorCode::ParseError:
    case ErrorCode::BadRequest:
    case ErrorCode::Truncated:
    case ErrorCode::FrameTooLarge:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedIndexType:
    case ErrorCode::OutOfBounds:
    case ErrorCode::LengthMismatch:
    case ErrorCode::DatasetExists: return Status::BadRequest;
    default: return Status::Internal;
  }
}

void encode_frame_into(Bytes& out, const Frame& frame, std::size_t max_payload) {
  if (frame.payload.size() > max_payload) {
    fail(ErrorCode::FrameTooLarge, "frame payload of " + std::to_string(frame.payload.size()) + " bytes exceeds " +
                                       std::to_string(max_payload));
  }
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(kFrameHeader + frame.payload.size()));
  w.u64(frame.request_id);
  w.u8(frame.msg_type);
  w.raw(frame.payload);
}

Bytes encode_frame(const Frame& frame, std::size_t max_payload) {
  Bytes out;
  out.reserve(kLengthField + kFrameHeader + frame.payload.size());
  encode_frame_into(out, frame, max_payload);
  return out;
}

Frame decode_frame(ByteView bytes, std::size_t max_payload) {
  ByteReader r(bytes);
  std::uint32_t length = r.u32("length");
  if (length < kFrameHeader) fail(ErrorCode::BadRequest, "frame length " + std::to_string(length) + " below header size");
  if (length - kFrameHeader > max_payload) fail(ErrorCode::FrameTooLarge, "frame length " + std::to_string(length));
  Frame f;
  f.request_id = r.u64("request_id");
  f.msg_type = r.u8("msg_type");
  ByteView payload = r.raw(length - kFrameHeader, "payload");
  f.payload.assign(payload.begin(), payload.end());
  if (!r.done()) fail(ErrorCode::BadRequest, "trailing bytes after frame");
  return f;
}

void FrameDecoder::feed(ByteView data) {
  if (skip_ > 0) {
    std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(skip_, data.size()));
    skip_ -= n;
    data = data.subspan(n);
  }
  if (data.empty()) return;
  compact();
  buf_.insert(buf_.end(), data.begin(), data.end());
}

void FrameDecoder::compact() {
  if (pos_ > 0 && (pos_ == buf_.size() || pos_ > (1u << 20))) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
}

std::optional<FrameDecoder::Event> FrameDecoder::next() {
  if (skip_ > 0) return std::nullopt;
  std::size_t avail = buf_.size() - pos_;
  if (avail < kLengthField + kFrameHeader) return std::nullopt;
  const std::uint8_t* p = buf_.data() + pos_;
  std::uint32_t length;
  std::memcpy(&length, p, 4);
  if (length < kFrameHeader) fail(ErrorCode::BadRequest, "frame length " + std::to_string(length) + " below header size");
  std::uint64_t request_id;
  std::memcpy(&request_id, p + 4, 8);
  std::uint8_t msg_type = p[12];
  if (length - kFrameHeader > max_payload_) {
    std::uint64_t body = length - kFrameHeader;
    std::size_t have = avail - kLengthField - kFrameHeader;
    std::size_t drop = static_cast<std::size_t>(std::min<std::uint64_t>(body, have));
    pos_ += kLengthField + kFrameHeader + drop;
    skip_ = body - drop;
    compact();
    return Oversized{request_id, msg_type, length};
  }
  if (avail < kLengthField + length) return std::nullopt;
  Frame f;
  f.request_id = request_id;
  f.msg_type = msg_type;
  f.payload.assign(p + kLengthField + kFrameHeader, p + kLengthField + length);
  pos_ += kLengthField + length;
  compact();
  return f;
}

Bytes ok_payload(ByteView body) {
  Bytes out;
  out.reserve(1 + body.size());
  out.push_back(static_cast<std::uint8_t>(Status::Ok));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes error_payload(Status status, ErrorCode code, std::string_view message) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(status));
  w.u8(static_cast<std::uint8_t>(code));
  w.raw(message);
  return w.take();
}

Bytes error_payload(ErrorCode code, std::string_view message) { return error_payload(status_for(code), code, message); }

Response split_response(ByteView payload) {
  ByteReader r(payload);
  Response out;
  out.status = static_cast<Status>(r.u8("status"));
  ByteView body = r.rest();
  out.body.assign(body.begin(), body.end());
  return out;
}

Bytes expect_ok(ByteView payload) {
  Response resp = split_response(payload);
  if (resp.status == Status::Ok) return std::move(resp.body);
  ErrorCode code = ErrorCode::Internal;
  std::string message;
  if (!resp.body.empty()) {
    code = static_cast<ErrorCode>(resp.body[0]);
    message.assign(resp.body.begin() + 1, resp.body.end());
  }
  if (resp.status == Status::BadRequest && resp.body.empty()) code = ErrorCode::BadRequest;
  throw Error(code, message.empty() ? std::string(to_string(code)) : message);
}

void encode_value(ByteWriter& w, const Value& v) {
  w.u8(static_cast<std::uint8_t>(v.index()));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          w.i64(x);
        } else if constexpr (std::is_same_v<T, double>) {
          w.f64(x);
        } else {
          w.str32(x);
        }
      },
      v);
}

Value decode_value(ByteReader& r) {
  switch (r.u8("literal type")) {
    case 0: return r.i64("literal");
    case 1: return r.f64("literal");
    case 2: return r.str32("literal");
    default: fail(ErrorCode::BadRequest, "unknown literal type tag");
  }
}

namespace {

void finish(const ByteReader& r, const char* what) {
  if (!r.done()) fail(ErrorCode::BadRequest, std::string("trailing bytes in ") + what);
}

}  // namespace

Bytes encode(const PutObjectRequest& m) {
  ByteWriter w;
  w.str16(m.name);
  w.raw(m.object);
  return w.take();
}

Bytes encode(const GetObjectRequest& m) {
  ByteWriter w;
  w.str16(m.name);
  return w.take();
}

Bytes encode(const ExecRequest& m) {
  ByteWriter w;
  w.str16(m.name);
  w.str32(m.sub_query);
  return w.take();
}

Bytes encode(const BuildIndexRequest& m) {
  ByteWriter w;
  w.str16(m.name);
  w.str16(m.column);
  return w.take();
}

Bytes encode(const LookupIndexRequest& m) {
  ByteWriter w;
  w.str16(m.dataset);
  w.str16(m.column);
  encode_value(w, m.literal);
  return w.take();
}

Bytes encode(const SubmitQueryRequest& m) {
  ByteWriter w;
  w.str32(m.text);
  return w.take();
}

Bytes encode(const CompressRequest& m) {
  ByteWriter w;
  w.str16(m.name);
  w.u8(static_cast<std::uint8_t>(m.mode));
  return w.take();
}

PutObjectRequest decode_put(ByteView p) {
  ByteReader r(p);
  PutObjectRequest m;
  m.name = r.str16("name");
  ByteView rest = r.rest();
  m.object.assign(rest.begin(), rest.end());
  return m;
}

GetObjectRequest decode_get(ByteView p) {
  ByteReader r(p);
  GetObjectRequest m{r.str16("name")};
  finish(r, "GET_OBJECT");
  return m;
}

ExecRequest decode_exec(ByteView p) {
  ByteReader r(p);
  ExecRequest m;
  m.name = r.str16("name");
  m.sub_query = r.str32("sub_query");
  finish(r, "EXEC");
  return m;
}

BuildIndexRequest decode_build_index(ByteView p) {
  ByteReader r(p);
  BuildIndexRequest m;
  m.name = r.str16("name");
  m.column = r.str16("column");
  finish(r, "BUILD_INDEX");
  return m;
}

LookupIndexRequest decode_lookup(ByteView p) {
  ByteReader r(p);
  LookupIndexRequest m;
  m.dataset = r.str16("dataset");
  m.column = r.str16("column");
  m.literal = decode_value(r);
  finish(r, "LOOKUP_INDEX");
  return m;
}

SubmitQueryRequest decode_submit(ByteView p) {
  ByteReader r(p);
  SubmitQueryRequest m{r.str32("text")};
  finish(r, "SUBMIT_QUERY");
  return m;
}

CompressRequest decode_compress(ByteView p) {
  ByteReader r(p);
  CompressRequest m;
  m.name = r.str16("name");
  std::uint8_t mode = r.u8("mode");
  if (mode > 1) fail(ErrorCode::BadRequest, "compress mode must be 0 or 1");
  m.mode = static_cast<CompressMode>(mode);
  finish(r, "COMPRESS");
  return m;
}

Bytes encode_exec_result(const ExecResult& res) {
  ByteWriter w;
  if (const auto* rows = std::get_if<RowsResult>(&res)) {
    // Rows travel in stored order, so ordinals stay implicit on the wire.
    w.u8(0);
    w.raw(encode_object(rows->rows));
  } else {
    w.u8(1);
    encode_state(std::get<PartialAggState>(res), w);
  }
  return w.take();
}

ExecResult decode_exec_result(ByteView body) {
  ByteReader r(body);
  std::uint8_t tag = r.u8("result tag");
  if (tag == 0) {
    RowsResult rows;
    rows.rows = decode_object(r.rest());
    rows.ordinals.resize(rows.rows.row_count);
    std::iota(rows.ordinals.begin(), rows.ordinals.end(), 0u);
    return rows;
  }
  if (tag == 1) {
    PartialAggState st = decode_state(r);
    finish(r, "EXEC result");
    return st;
  }
  fail(ErrorCode::BadRequest, "unknown EXEC result tag");
}

Bytes encode_index_hits(const std::vector<IndexHit>& hits) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(hits.size()));
  for (const auto& h : hits) {
    w.u64(h.partition_index);
    w.u32(static_cast<std::uint32_t>(h.ordinals.size()));
    for (auto o : h.ordinals) w.u32(o);
  }
  return w.take();
}

std::vector<IndexHit> decode_index_hits(ByteView body) {
  ByteReader r(body);
  std::uint32_t n = r.u32("hit count");
  std::vector<IndexHit> hits;
  for (std::uint32_t i = 0; i < n; ++i) {
    IndexHit h;
    h.partition_index = r.u64("partition_index");
    std::uint32_t count = r.u32("count");
    if (count > r.remaining() / 4) fail(ErrorCode::Truncated, "truncated at ordinals");
    h.ordinals.resize(count);
    for (auto& o : h.ordinals) o = r.u32("ordinal");
    hits.push_back(std::move(h));
  }
  finish(r, "LOOKUP_INDEX result");
  return hits;
}

Bytes encode_query_result(const QueryResult& res) {
  ByteWriter w;
  if (const auto* t = std::get_if<Table>(&res)) {
    w.u8(0);
    w.raw(encode_object(seal(*t)));
  } else {
    const Scalar& s = std::get<Scalar>(res);
    w.u8(1);
    if (const auto* i = std::get_if<std::int64_t>(&s)) {
      w.i64(*i);
    } else {
      w.f64(std::get<double>(s));
    }
    w.u8(static_cast<std::uint8_t>(type_of(s)));
  }
  return w.take();
}

QueryResult decode_query_result(ByteView body) {
  ByteReader r(body);
  std::uint8_t tag = r.u8("result tag");
  if (tag == 0) return unseal(decode_object(r.rest()));
  if (tag != 1) fail(ErrorCode::BadRequest, "unknown query result tag");
  ByteView value = r.raw(8, "scalar");
  std::uint8_t type = r.u8("scalar type");
  finish(r, "SUBMIT_QUERY result");
  if (type == static_cast<std::uint8_t>(ColumnType::Int64)) {
    std::int64_t v;
    std::memcpy(&v, value.data(), 8);
    return Scalar(v);
  }
  if (type == static_cast<std::uint8_t>(ColumnType::Float64)) {
    double v;
    std::memcpy(&v, value.data(), 8);
    return Scalar(v);
  }
  fail(ErrorCode::BadRequest, "unknown scalar type tag");
}

Bytes encode_u64(std::uint64_t v) {
  ByteWriter w;
  w.u64(v);
  return w.take();
}

std::uint64_t decode_u64(ByteView body) {
  ByteReader r(body);
  std::uint64_t v = r.u64("value");
  finish(r, "response");
  return v;
}

}  // namespace skyshard::wire
