#include "skyshard/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace skyshard {

std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  char ch;
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started) {
          fail(ErrorCode::ParseError, "row " + std::to_string(rows.size()) + ", column " +
                                          std::to_string(row.size()) + ": stray quote in unquoted field");
        }
        quoted = field_started = any = true;
        break;
      case ',':
        any = true;
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line;
        if (any || field_started || !field.empty()) end_row();
        break;
      default:
        field += ch;
        field_started = any = true;
    }
  }
  if (quoted) {
    fail(ErrorCode::ParseError, "row " + std::to_string(rows.size()) + ", column " + std::to_string(row.size()) +
                                    ": unterminated quoted field");
  }
  if (any || !field.empty()) end_row();
  return rows;
}

namespace {

bool parse_int_cell(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_decimal_cell(const std::string& s, double& out) {
  if (s.empty()) return false;
  bool digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '-' && c != '+' && c != '.' && c != 'e' && c != 'E') {
      return false;
    }
  }
  if (!digit) return false;
  const char* b = s.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Table table_from_csv(std::istream& in) {
  auto records = read_csv_records(in);
  if (records.empty()) fail(ErrorCode::ParseError, "row 0: missing header row");
  const auto& header = records[0];
  std::size_t width = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      fail(ErrorCode::ParseError, "row " + std::to_string(r) + ", column " +
                                      std::to_string(std::min(records[r].size(), width)) + ": expected " +
                                      std::to_string(width) + " fields, found " + std::to_string(records[r].size()));
    }
  }
  std::vector<Column> cols;
  for (std::size_t c = 0; c < width; ++c) {
    bool all_int = true, all_dec = true;
    for (std::size_t r = 1; r < records.size() && (all_int || all_dec); ++r) {
      std::int64_t i;
      double d;
      if (all_int && !parse_int_cell(records[r][c], i)) all_int = false;
      if (!all_int && all_dec && !parse_decimal_cell(records[r][c], d)) all_dec = false;
    }
    ColumnType t = all_int ? ColumnType::Int64 : all_dec ? ColumnType::Float64 : ColumnType::Utf8;
    cols.push_back({header[c], t});
  }
  Schema schema;
  try {
    schema = Schema(cols);
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("row 0: bad header: ") + e.what());
  }
  Table t(schema);
  for (std::size_t c = 0; c < width; ++c) {
    auto& col = t.mutable_column(c);
    switch (cols[c].type) {
      case ColumnType::Int64: {
        std::vector<std::int64_t> v(records.size() - 1);
        for (std::size_t r = 1; r < records.size(); ++r) parse_int_cell(records[r][c], v[r - 1]);
        col = std::move(v);
        break;
      }
      case ColumnType::Float64: {
        std::vector<double> v(records.size() - 1);
        for (std::size_t r = 1; r < records.size(); ++r) parse_decimal_cell(records[r][c], v[r - 1]);
        col = std::move(v);
        break;
      }
      case ColumnType::Utf8: {
        std::vector<std::string> v;
        v.reserve(records.size() - 1);
        for (std::size_t r = 1; r < records.size(); ++r) v.push_back(std::move(records[r][c]));
        col = std::move(v);
        break;
      }
    }
  }
  t.set_num_rows(records.size() - 1);
  return t;
}

Table table_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  return table_from_csv(in);
}

std::string format_table(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.num_columns(); ++c) {
    if (c) out += '\t';
    out += t.schema()[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    for (std::size_t c = 0; c < t.num_columns(); ++c) {
      if (c) out += '\t';
      out += format_value(t.value(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace skyshard
