#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyshard/sealed_object.hpp"
#include "skyshard/table.hpp"

namespace skyshard {

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view op_text(CompareOp op);

/// Predicate tree: Compare(column, op, literal) | And | Or | Not | True.
struct Predicate {
  enum class Kind : std::uint8_t { True, Compare, And, Or, Not };

  Kind kind = Kind::True;
  std::string column;
  CompareOp op = CompareOp::Eq;
  Value literal;
  std::vector<Predicate> children;

  static Predicate always() { return {}; }
  static Predicate compare(std::string column, CompareOp op, Value literal);
  static Predicate all_of(std::vector<Predicate> children);
  static Predicate any_of(std::vector<Predicate> children);
  static Predicate negate(Predicate child);

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Canonical text form accepted back by the parser.
std::string to_text(const Predicate& p);

/// Checks column references and literal types against `schema`, converting
/// integer literals compared against Float64 columns. Throws UnknownColumn or
/// TypeMismatch.
Predicate bind(const Predicate& p, const Schema& schema);

/// Evaluates a bound predicate against one row.
class RowMatcher {
 public:
  RowMatcher(const Predicate& bound, const Table& table);
  bool operator()(std::size_t row) const;

 private:
  struct Node {
    Predicate::Kind kind = Predicate::Kind::True;
    std::size_t column = 0;
    CompareOp op = CompareOp::Eq;
    Value literal;
    std::vector<Node> children;
  };
  static Node compile(const Predicate& p, const Schema& schema);
  bool eval(const Node& n, std::size_t row) const;

  const Table* table_;
  Node root_;
};

/// Row ordinals of `table` satisfying a bound predicate, ascending.
std::vector<std::uint32_t> filter_rows(const Predicate& bound, const Table& table);

/// True only when the zone map proves no row can satisfy the bound predicate.
bool zone_map_excludes(const Predicate& bound, const Schema& schema, const ZoneMap& zone_map);

/// Top-level equality conjuncts (`col = literal` reachable through And nodes only).
std::vector<const Predicate*> equality_conjuncts(const Predicate& p);

enum class AggFn : std::uint8_t { Count, Sum, Min, Max, Avg, Median, MedianApprox };

std::string_view agg_name(AggFn fn);
std::optional<AggFn> parse_agg_name(std::string_view s);

inline constexpr std::uint32_t kDefaultBins = 1024;

struct AggSpec {
  AggFn fn = AggFn::Count;
  std::string column;
  std::uint32_t bins = kDefaultBins;

  friend bool operator==(const AggSpec&, const AggSpec&) = default;
};

struct HistogramParams {
  double lo = 0;
  double hi = 0;
  std::uint32_t bins = kDefaultBins;

  friend bool operator==(const HistogramParams&, const HistogramParams&) = default;
};

struct Projection {
  bool all = true;
  std::vector<std::string> columns;

  static Projection star() { return {}; }
  static Projection of(std::vector<std::string> cols) { return {false, std::move(cols)}; }
  /// Column indices in output order.
  std::vector<std::size_t> resolve(const Schema& schema) const;

  friend bool operator==(const Projection&, const Projection&) = default;
};

struct Query {
  std::string dataset;
  Projection projection;
  Predicate predicate;
  std::optional<AggSpec> aggregate;

  friend bool operator==(const Query&, const Query&) = default;
};

/// The per-object restriction of a query; travels to nodes as query text.
struct SubQuery {
  Projection projection;
  Predicate predicate;
  std::optional<AggSpec> aggregate;
  std::optional<HistogramParams> histogram;

  friend bool operator==(const SubQuery&, const SubQuery&) = default;
};

/// Grammar:
///   query := SELECT (proj | agg) FROM ident [WHERE pred]
///   proj  := '*' | ident (',' ident)*
///   agg   := fn '(' ident ')' [BINS int [RANGE num num]]
/// RANGE only appears in sub-query text produced by the driver.
struct ParsedQuery {
  Query query;
  std::optional<HistogramParams> histogram;
};

ParsedQuery parse_query_text(std::string_view text);
Query parse_query(std::string_view text);

std::string to_text(const Query& q);
std::string to_text(const SubQuery& sq, std::string_view dataset);
/// Returns (dataset, sub-query).
std::pair<std::string, SubQuery> parse_sub_query(std::string_view text);

}  // namespace skyshard
