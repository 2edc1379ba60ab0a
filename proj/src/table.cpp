#include "skyshard/table.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace skyshard {

std::string_view type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Int64: return "i64";
    case ColumnType::Float64: return "f64";
    case ColumnType::Utf8: return "utf8";
  }
  return "?";
}

ColumnType parse_type_name(std::string_view s) {
  if (s == "i64") return ColumnType::Int64;
  if (s == "f64") return ColumnType::Float64;
  if (s == "utf8") return ColumnType::Utf8;
  fail(ErrorCode::SchemaParse, "unknown column type '" + std::string(s) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string format_value(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::Int64: return std::to_string(std::get<std::int64_t>(v));
    case ColumnType::Float64: return format_double(std::get<double>(v));
    case ColumnType::Utf8: return std::get<std::string>(v);
  }
  return {};
}

namespace {

bool valid_column_name(std::string_view name) {
  if (name.empty()) return false;
  for (unsigned char c : name) {
    if (c == ',' || c == ':' || c < 0x20) return false;
  }
  return true;
}

ColumnData empty_column(ColumnType t) {
  switch (t) {
    case ColumnType::Int64: return std::vector<std::int64_t>{};
    case ColumnType::Float64: return std::vector<double>{};
    case ColumnType::Utf8: return std::vector<std::string>{};
  }
  return {};
}

}  // namespace

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) fail(ErrorCode::SchemaParse, "schema needs at least one column");
  std::set<std::string_view> seen;
  for (const auto& c : columns_) {
    if (!valid_column_name(c.name)) fail(ErrorCode::SchemaParse, "invalid column name '" + c.name + "'");
    if (!seen.insert(c.name).second) fail(ErrorCode::SchemaParse, "duplicate column name '" + c.name + "'");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  fail(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
}

std::string Schema::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i].name;
    out += ':';
    out += type_name(columns_[i].type);
  }
  return out;
}

Schema Schema::parse(std::string_view text) {
  std::vector<Column> cols;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    auto colon = item.rfind(':');
    if (colon == std::string_view::npos) fail(ErrorCode::SchemaParse, "schema entry '" + std::string(item) + "' lacks ':'");
    cols.push_back({std::string(item.substr(0, colon)), parse_type_name(item.substr(colon + 1))});
    start = end + 1;
  }
  return Schema(std::move(cols));
}

Table::Table(Schema schema) : schema_(std::move(schema)) {
  cols_.reserve(schema_.size());
  for (const auto& c : schema_.columns()) cols_.push_back(empty_column(c.type));
}

void Table::append_row(std::span<const Value> row) {
  if (row.size() != schema_.size()) {
    fail(ErrorCode::LengthMismatch,
         "row has " + std::to_string(row.size()) + " values, schema has " + std::to_string(schema_.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (type_of(row[c]) != schema_[c].type) {
      fail(ErrorCode::TypeMismatch, "column '" + schema_[c].name + "' expects " + std::string(type_name(schema_[c].type)));
    }
    if (type_of(row[c]) == ColumnType::Float64 && !std::isfinite(std::get<double>(row[c]))) {
      fail(ErrorCode::InvalidArgument, "non-finite value rejected in column '" + schema_[c].name + "'");
    }
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    std::visit([&](auto& vec) {
      using T = typename std::decay_t<decltype(vec)>::value_type;
      vec.push_back(std::get<T>(row[c]));
    }, cols_[c]);
  }
  ++rows_;
}

Value Table::value(std::size_t row, std::size_t col) const {
  return std::visit([&](const auto& vec) -> Value { return vec[row]; }, cols_[col]);
}

std::vector<Value> Table::row(std::size_t r) const {
  std::vector<Value> out;
  out.reserve(cols_.size());
  for (std::size_t c = 0; c < cols_.size(); ++c) out.push_back(value(r, c));
  return out;
}

void Table::set_num_rows(std::size_t n) {
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    std::size_t len = std::visit([](const auto& v) { return v.size(); }, cols_[c]);
    if (len != n) fail(ErrorCode::LengthMismatch, "column '" + schema_[c].name + "' length disagrees with row count");
    if (auto* d = std::get_if<std::vector<double>>(&cols_[c])) {
      for (double x : *d) {
        if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "non-finite value rejected in column '" + schema_[c].name + "'");
      }
    }
  }
  rows_ = n;
}

Table Table::slice(std::size_t begin, std::size_t end) const {
  Table out(schema_);
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    std::visit([&](const auto& src) {
      using V = std::decay_t<decltype(src)>;
      out.cols_[c] = V(src.begin() + static_cast<std::ptrdiff_t>(begin), src.begin() + static_cast<std::ptrdiff_t>(end));
    }, cols_[c]);
  }
  out.rows_ = end - begin;
  return out;
}

Table Table::take(std::span<const std::uint32_t> rows) const {
  Table out(schema_);
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    std::visit([&](const auto& src) {
      using V = std::decay_t<decltype(src)>;
      V dst;
      dst.reserve(rows.size());
      for (auto r : rows) dst.push_back(src[r]);
      out.cols_[c] = std::move(dst);
    }, cols_[c]);
  }
  out.rows_ = rows.size();
  return out;
}

Table Table::project(std::span<const std::size_t> cols) const {
  std::vector<Column> schema_cols;
  for (auto c : cols) schema_cols.push_back(schema_[c]);
  Table out{Schema(std::move(schema_cols))};
  for (std::size_t i = 0; i < cols.size(); ++i) out.cols_[i] = cols_[cols[i]];
  out.rows_ = rows_;
  return out;
}

void Table::append(const Table& other) {
  if (!(other.schema_ == schema_)) fail(ErrorCode::SchemaMismatch, "cannot append tables with different schemas");
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    std::visit([&](auto& dst) {
      using V = std::decay_t<decltype(dst)>;
      const auto& src = std::get<V>(other.cols_[c]);
      dst.insert(dst.end(), src.begin(), src.end());
    }, cols_[c]);
  }
  rows_ += other.rows_;
}

bool operator==(const Table& a, const Table& b) {
  return a.schema_ == b.schema_ && a.rows_ == b.rows_ && a.cols_ == b.cols_;
}

}  // namespace skyshard
