#pragma once

#include <istream>
#include <string>
#include <vector>

#include "skyshard/table.hpp"

namespace skyshard {

/// RFC 4180 records: quoted fields may hold commas, quotes ("") and newlines.
/// Throws ParseError naming the row and column.
std::vector<std::vector<std::string>> read_csv_records(std::istream& in);

/// Header row names the columns. A column is Int64 if every cell parses as an
/// integer, else Float64 if every cell parses as a finite decimal, else Utf8.
Table table_from_csv(std::istream& in);
Table table_from_csv_text(const std::string& text);

/// Tab-separated header and rows (the CLI query output format).
std::string format_table(const Table& t);

}  // namespace skyshard
