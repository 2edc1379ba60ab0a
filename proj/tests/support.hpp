#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "skyshard/driver.hpp"
#include "skyshard/query.hpp"
#include "skyshard/table.hpp"

namespace skyshard::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& sub) const { return path_ / sub; }

 private:
  std::filesystem::path path_;
};

using Rng = std::mt19937_64;

/// Random schema of 1..4 columns named c0..c3, always with one Int64 column first.
Schema random_schema(Rng& rng);
Value random_value(Rng& rng, ColumnType t);
Table random_table(Rng& rng, const Schema& schema, std::size_t rows);

/// Random predicate over `table`'s columns; literals are drawn from the table
/// when possible so selections are non-trivial.
Predicate random_predicate(Rng& rng, const Table& table, int depth = 2);

/// Random SELECT or exact aggregate (no median_approx) over `table`'s columns.
Query random_query(Rng& rng, const std::string& dataset, const Table& table);

/// Executes `q` through `driver` and through the brute-force oracle over the
/// unpartitioned `table`. Empty when they agree exactly, else a description.
std::string compare_with_oracle(Driver& driver, const Query& q, const Table& table);

/// One randomized array trial: creates `name` (rank 1..3, random dtype and
/// chunking), applies random hyperslab writes and reads, and compares every
/// read and a final full read against a dense in-memory array. Empty when
/// everything matched.
std::string array_oracle_trial(Driver& driver, Rng& rng, const std::string& name);

std::string hex(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> unhex(std::string_view text);

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);

}  // namespace skyshard::testing
