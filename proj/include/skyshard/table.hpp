#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skyshard/error.hpp"

namespace skyshard {

/// Variant order matches the type tags used on disk and on the wire.
enum class ColumnType : std::uint8_t { Int64 = 0, Float64 = 1, Utf8 = 2 };

std::string_view type_name(ColumnType t);  // "i64" | "f64" | "utf8"
ColumnType parse_type_name(std::string_view s);
inline bool is_numeric(ColumnType t) { return t != ColumnType::Utf8; }

using Value = std::variant<std::int64_t, double, std::string>;

inline ColumnType type_of(const Value& v) { return static_cast<ColumnType>(v.index()); }

/// Renders a value the way the CLI prints it: integers in decimal, doubles in
/// shortest round-trip form, strings verbatim.
std::string format_value(const Value& v);
std::string format_double(double v);

struct Column {
  std::string name;
  ColumnType type = ColumnType::Int64;

  friend bool operator==(const Column&, const Column&) = default;
};

class Schema {
 public:
  Schema() = default;
  /// Throws SchemaParse on empty, duplicate or malformed column names.
  explicit Schema(std::vector<Column> columns);

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws UnknownColumn.
  std::size_t index_of(std::string_view name) const;

  /// "a:i64,b:f64,c:utf8"
  std::string to_text() const;
  static Schema parse(std::string_view text);

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Column> columns_;
};

using ColumnData = std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::string>>;

/// Rows of a schema, stored column-wise. Float64 cells are always finite.
class Table {
 public:
  Table() = default;
  explicit Table(Schema schema);

  const Schema& schema() const { return schema_; }
  std::size_t num_rows() const { return rows_; }
  std::size_t num_columns() const { return schema_.size(); }

  /// Appends one row; throws TypeMismatch / LengthMismatch / InvalidArgument (NaN).
  void append_row(std::span<const Value> row);
  void append_row(std::initializer_list<Value> row) { append_row(std::span<const Value>(row.begin(), row.size())); }

  Value value(std::size_t row, std::size_t col) const;
  std::vector<Value> row(std::size_t r) const;

  const ColumnData& column(std::size_t c) const { return cols_[c]; }
  template <class T>
  const std::vector<T>& column_as(std::size_t c) const {
    return std::get<std::vector<T>>(cols_[c]);
  }
  /// Direct column access for bulk builders; caller keeps lengths consistent
  /// and must call set_num_rows afterwards.
  ColumnData& mutable_column(std::size_t c) { return cols_[c]; }
  void set_num_rows(std::size_t n);

  /// Rows [begin, end) as a new table.
  Table slice(std::size_t begin, std::size_t end) const;
  Table take(std::span<const std::uint32_t> rows) const;
  Table project(std::span<const std::size_t> cols) const;
  /// Appends all rows of `other`; schemas must be equal.
  void append(const Table& other);

  friend bool operator==(const Table& a, const Table& b);

 private:
  Schema schema_;
  std::vector<ColumnData> cols_;
  std::size_t rows_ = 0;
};

}  // namespace skyshard
