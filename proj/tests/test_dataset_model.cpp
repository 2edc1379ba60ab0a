#include <doctest.h>

#include <cmath>
#include <limits>

#include "skyshard/sealed_object.hpp"
#include "support.hpp"

using namespace skyshard;
using skyshard::testing::hex;

namespace {

Table table_of(std::vector<Column> cols, std::vector<std::vector<Value>> rows) {
  Table t{Schema(std::move(cols))};
  for (auto& r : rows) t.append_row(r);
  return t;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("schema text round trip and validation") {
  Schema s({{"a", ColumnType::Int64}, {"b", ColumnType::Float64}, {"name", ColumnType::Utf8}});
  CHECK(s.to_text() == "a:i64,b:f64,name:utf8");
  CHECK(Schema::parse(s.to_text()) == s);
  CHECK(code_of([] { Schema(std::vector<Column>{}); }) == ErrorCode::SchemaParse);
  CHECK(code_of([] { Schema({{"a", ColumnType::Int64}, {"a", ColumnType::Utf8}}); }) == ErrorCode::SchemaParse);
  CHECK(code_of([] { Schema::parse("a:i32"); }) == ErrorCode::SchemaParse);
  CHECK(code_of([] { Schema::parse("a"); }) == ErrorCode::SchemaParse);
  CHECK(code_of([] { Schema::parse(""); }) == ErrorCode::SchemaParse);
}

TEST_CASE("tables reject mistyped rows and non-finite floats") {
  Table t{Schema({{"a", ColumnType::Int64}, {"b", ColumnType::Float64}})};
  CHECK(code_of([&] { t.append_row({Value(1.0), Value(2.0)}); }) == ErrorCode::TypeMismatch);
  CHECK(code_of([&] { t.append_row({Value(std::int64_t{1})}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { t.append_row({Value(std::int64_t{1}), Value(std::nan(""))}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          t.append_row({Value(std::int64_t{1}), Value(std::numeric_limits<double>::infinity())});
        }) == ErrorCode::InvalidArgument);
  CHECK(t.num_rows() == 0);
}

TEST_CASE("encode_object: empty table header") {
  Table t{Schema({{"a", ColumnType::Int64}})};
  Bytes bytes = encode_object(seal(t));
  // magic | kind | version | schema len | "a:i64" | row_count | compressed | zone absent | payload_len
  CHECK(hex(bytes) == "534b5931" "00" "01000000" "05000000" "613a693634" "0000000000000000" "00" "00"
                      "0000000000000000");
  auto back = decode_object(bytes);
  CHECK(back.row_count == 0);
  CHECK(back.payload.empty());
}

TEST_CASE("encode_object: single i64 row is little-endian") {
  auto t = table_of({{"a", ColumnType::Int64}}, {{Value(std::int64_t{7})}});
  SealedObject obj = seal(t);
  CHECK(hex(obj.payload) == "0700000000000000");
  CHECK(hex(encode_object(obj)) == "534b5931" "00" "01000000" "05000000" "613a693634" "0100000000000000" "00"
                                   "01" "0700000000000000" "0700000000000000"
                                   "0800000000000000" "0700000000000000");
}

TEST_CASE("encode_object: two-column round trip and zone map") {
  auto t = table_of({{"a", ColumnType::Int64}, {"b", ColumnType::Float64}},
                    {{Value(std::int64_t{1}), Value(2.5)}, {Value(std::int64_t{3}), Value(-1.0)}});
  SealedObject obj = seal(t);
  SealedObject back = decode_object(encode_object(obj));
  CHECK(back == obj);
  CHECK(unseal(back) == t);
  REQUIRE(back.zone_map.size() == 2);
  CHECK(back.zone_map[0]->min == Value(std::int64_t{1}));
  CHECK(back.zone_map[0]->max == Value(std::int64_t{3}));
  CHECK(back.zone_map[1]->min == Value(-1.0));
  CHECK(back.zone_map[1]->max == Value(2.5));
  // Uncompressed payload length is the sum of encoded row sizes.
  CHECK(back.payload.size() == 2 * (8 + 8));
}

TEST_CASE("utf8 payload carries u32 length prefixes") {
  auto t = table_of({{"s", ColumnType::Utf8}}, {{Value(std::string("hé"))}, {Value(std::string())}});
  SealedObject obj = seal(t);
  CHECK(hex(obj.payload) == "03000000" "68c3a9" "00000000");
  CHECK(!obj.zone_map[0].has_value());
  CHECK(unseal(decode_object(encode_object(obj))) == t);
}

TEST_CASE("property: decode(encode(x)) == x for randomized tables") {
  testing::Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    Schema s = testing::random_schema(rng);
    Table t = testing::random_table(rng, s, rng() % 200);
    SealedObject obj = seal(t, i % 2 ? ObjectKind::ArrayChunk : ObjectKind::TableShard);
    if (i % 3 == 0) obj = with_compression(obj, true);
    Bytes bytes = encode_object(obj);
    SealedObject back = decode_object(bytes);
    CHECK(back == obj);
    CHECK(encode_object(back) == bytes);
    CHECK(unseal(back) == t);
  }
}

TEST_CASE("zone-map soundness over random objects") {
  testing::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Schema s = testing::random_schema(rng);
    Table t = testing::random_table(rng, s, rng() % 100);
    SealedObject obj = decode_object(encode_object(seal(t)));
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (!obj.zone_map[c]) {
        CHECK((t.num_rows() == 0 || s[c].type == ColumnType::Utf8));
        continue;
      }
      for (std::size_t r = 0; r < t.num_rows(); ++r) {
        CHECK(!(t.value(r, c) < obj.zone_map[c]->min));
        CHECK(!(obj.zone_map[c]->max < t.value(r, c)));
      }
    }
  }
}

TEST_CASE("decode_object errors name the violated field") {
  auto t = table_of({{"a", ColumnType::Int64}}, {{Value(std::int64_t{7})}});
  Bytes good = encode_object(seal(t));

  Bytes flipped = good;
  flipped[0] ^= 0xff;
  CHECK(code_of([&] { decode_object(flipped); }) == ErrorCode::BadMagic);

  Bytes version = good;
  version[5] = 2;
  CHECK(code_of([&] { decode_object(version); }) == ErrorCode::UnsupportedVersion);

  Bytes long_payload = good;
  long_payload[long_payload.size() - 16] = 0x20;  // payload_len = 32 > 8 remaining
  try {
    decode_object(long_payload);
    FAIL("expected Truncated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Truncated);
    CHECK(std::string(e.what()).find("payload") != std::string::npos);
  }

  Bytes cut(good.begin(), good.begin() + 12);
  try {
    decode_object(cut);
    FAIL("expected Truncated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Truncated);
    CHECK(std::string(e.what()).find("schema_text") != std::string::npos);
  }

  Bytes bad_schema = good;
  bad_schema[14] = 'X';  // "a:i64" -> "aXi64"
  CHECK(code_of([&] { decode_object(bad_schema); }) == ErrorCode::SchemaParse);
}

TEST_CASE("compute_zone_map") {
  auto t = table_of({{"a", ColumnType::Int64}, {"s", ColumnType::Utf8}},
                    {{Value(std::int64_t{3}), Value(std::string("x"))},
                     {Value(std::int64_t{1}), Value(std::string("y"))},
                     {Value(std::int64_t{2}), Value(std::string("z"))}});
  auto zm = compute_zone_map(t);
  CHECK(zm[0] == ZoneEntry{Value(std::int64_t{1}), Value(std::int64_t{3})});
  CHECK(!zm[1].has_value());

  Table empty{t.schema()};
  for (const auto& z : compute_zone_map(empty)) CHECK(!z.has_value());

  // 1000 random doubles against an independent single-pass fold.
  testing::Rng rng(3);
  Table f{Schema({{"x", ColumnType::Float64}})};
  std::uniform_real_distribution<double> dist(-1e9, 1e9);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < 1000; ++i) {
    double v = dist(rng);
    lo = v < lo ? v : lo;
    hi = v > hi ? v : hi;
    f.append_row({Value(v)});
  }
  auto fz = compute_zone_map(f);
  CHECK(std::get<double>(fz[0]->min) == lo);
  CHECK(std::get<double>(fz[0]->max) == hi);
}

TEST_CASE("encoding is deterministic") {
  testing::Rng rng(11);
  Table t = testing::random_table(rng, testing::random_schema(rng), 50);
  CHECK(encode_object(seal(t)) == encode_object(seal(t)));
}

TEST_CASE("compression round trip and effectiveness") {
  Table t{Schema({{"a", ColumnType::Int64}, {"b", ColumnType::Float64}})};
  for (int i = 0; i < 4096; ++i) t.append_row({Value(std::int64_t{5}), Value(1.5)});
  SealedObject raw = seal(t);
  SealedObject packed = with_compression(raw, true);
  CHECK(packed.compressed);
  CHECK(packed.payload.size() < raw.payload.size());
  CHECK(unseal(packed) == t);
  SealedObject unpacked = with_compression(packed, false);
  CHECK(encode_object(unpacked) == encode_object(raw));
  CHECK(with_compression(raw, false) == raw);
}

TEST_CASE("object names render with 8 zero-padded digits") {
  CHECK(ObjectName{"t", 3}.render() == "t.00000003");
  CHECK(ObjectName::parse("lineitem.00012345") == ObjectName{"lineitem", 12345});
  CHECK(code_of([] { ObjectName::parse("t.123"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ObjectName::parse("t00000001"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ObjectName{"a.b", 1}.render(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ObjectName{"t", kMaxPartitions}.render(); }) == ErrorCode::InvalidArgument);

  testing::Rng rng(5);
  const std::string alphabet = "abcXYZ_-09é";
  for (int i = 0; i < 500; ++i) {
    std::string ds;
    for (std::size_t k = 0, n = 1 + rng() % 12; k < n; ++k) ds += alphabet[rng() % alphabet.size()];
    if (!valid_dataset_name(ds)) continue;
    ObjectName name{ds, rng() % kMaxPartitions};
    CHECK(ObjectName::parse(name.render()) == name);
  }
}
