#pragma once

// Brute-force single-pass query evaluation over an un-partitioned table.
// Deliberately shares no evaluation code with the library: predicates are
// interpreted row by row on Values, sums are exact via MPFR.

#include <mpfr.h>

#include <algorithm>
#include <optional>
#include <variant>
#include <vector>

#include "skyshard/aggregate.hpp"
#include "skyshard/query.hpp"
#include "skyshard/table.hpp"

namespace skyshard::oracle {

inline bool compare_values(const Value& cell, CompareOp op, const Value& literal) {
  auto cmp = [&](const auto& a, const auto& b) {
    switch (op) {
      case CompareOp::Eq: return a == b;
      case CompareOp::Ne: return a != b;
      case CompareOp::Lt: return a < b;
      case CompareOp::Le: return a <= b;
      case CompareOp::Gt: return a > b;
      case CompareOp::Ge: return a >= b;
    }
    return false;
  };
  if (std::holds_alternative<double>(cell)) {
    double lit = std::holds_alternative<std::int64_t>(literal) ? static_cast<double>(std::get<std::int64_t>(literal))
                                                               : std::get<double>(literal);
    return cmp(std::get<double>(cell), lit);
  }
  if (std::holds_alternative<std::int64_t>(cell)) return cmp(std::get<std::int64_t>(cell), std::get<std::int64_t>(literal));
  return cmp(std::get<std::string>(cell), std::get<std::string>(literal));
}

inline bool eval(const Predicate& p, const Table& t, std::size_t row) {
  switch (p.kind) {
    case Predicate::Kind::True: return true;
    case Predicate::Kind::Compare: {
      std::size_t col = 0;
      while (t.schema()[col].name != p.column) ++col;
      return compare_values(t.value(row, col), p.op, p.literal);
    }
    case Predicate::Kind::And:
      return std::all_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return eval(c, t, row); });
    case Predicate::Kind::Or:
      return std::any_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return eval(c, t, row); });
    case Predicate::Kind::Not: return !eval(p.children[0], t, row);
  }
  return false;
}

inline Table select(const Table& t, const Query& q) {
  std::vector<std::string> names;
  if (q.projection.all) {
    for (const auto& c : t.schema().columns()) names.push_back(c.name);
  } else {
    names = q.projection.columns;
  }
  std::vector<Column> cols;
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    for (std::size_t c = 0; c < t.num_columns(); ++c) {
      if (t.schema()[c].name == n) {
        cols.push_back(t.schema()[c]);
        idx.push_back(c);
      }
    }
  }
  Table out{Schema(cols)};
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    if (!eval(q.predicate, t, r)) continue;
    std::vector<Value> row;
    for (auto c : idx) row.push_back(t.value(r, c));
    out.append_row(row);
  }
  return out;
}

/// Correctly rounded sum of doubles using a 2300-bit MPFR accumulator (exact
/// for any finite doubles and counts far beyond test sizes).
inline double exact_sum(const std::vector<double>& xs) {
  mpfr_t acc;
  mpfr_init2(acc, 2300);
  mpfr_set_zero(acc, 1);
  for (double x : xs) mpfr_add_d(acc, acc, x, MPFR_RNDN);
  double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clear(acc);
  return out;
}

/// nullopt means the aggregate is undefined (zero rows for avg/min/max/median).
inline std::optional<Scalar> aggregate(const Table& t, const Query& q) {
  const AggSpec& spec = *q.aggregate;
  std::size_t col = 0;
  while (t.schema()[col].name != spec.column) ++col;
  ColumnType type = t.schema()[col].type;
  std::vector<Value> vals;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    if (eval(q.predicate, t, r)) vals.push_back(t.value(r, col));
  }
  auto as_double = [](const Value& v) {
    return std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int64_t>(v));
  };
  std::vector<double> ds;
  for (const auto& v : vals) {
    if (type != ColumnType::Utf8) ds.push_back(as_double(v));
  }
  switch (spec.fn) {
    case AggFn::Count: return static_cast<std::int64_t>(vals.size());
    case AggFn::Sum:
    case AggFn::Avg: {
      Scalar sum;
      if (type == ColumnType::Int64) {
        std::int64_t s = 0;
        for (const auto& v : vals) s += std::get<std::int64_t>(v);
        sum = s;
      } else {
        sum = exact_sum(ds);
      }
      if (spec.fn == AggFn::Sum) return sum;
      if (vals.empty()) return std::nullopt;
      double total = std::holds_alternative<double>(sum) ? std::get<double>(sum)
                                                         : static_cast<double>(std::get<std::int64_t>(sum));
      return total / static_cast<double>(vals.size());
    }
    case AggFn::Min:
    case AggFn::Max: {
      if (vals.empty()) return std::nullopt;
      Value best = vals[0];
      for (const auto& v : vals) {
        bool better = spec.fn == AggFn::Min ? v < best : best < v;
        if (better) best = v;
      }
      if (type == ColumnType::Int64) return std::get<std::int64_t>(best);
      return std::get<double>(best);
    }
    case AggFn::Median:
    case AggFn::MedianApprox: {
      if (ds.empty()) return std::nullopt;
      std::sort(ds.begin(), ds.end());
      std::size_t n = ds.size();
      if (n % 2 == 1) return ds[n / 2];
      return (ds[n / 2 - 1] + ds[n / 2]) / 2.0;
    }
  }
  return std::nullopt;
}

}  // namespace skyshard::oracle
