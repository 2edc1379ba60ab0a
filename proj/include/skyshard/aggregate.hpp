#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "skyshard/bytes.hpp"
#include "skyshard/query.hpp"
#include "skyshard/table.hpp"

namespace skyshard {

/// Aggregate results are Int64 or Float64.
using Scalar = std::variant<std::int64_t, double>;

inline ColumnType type_of(const Scalar& s) { return static_cast<ColumnType>(s.index()); }
std::string format_scalar(const Scalar& s);

/// Exact floating-point sum kept as non-overlapping partials; rounding happens
/// once in value(). Adding is order-independent in the exact result.
class ExactSum {
 public:
  void add(double x);
  void add(const ExactSum& other);
  /// Correctly rounded sum of everything added.
  double value() const;
  const std::vector<double>& partials() const { return partials_; }
  static ExactSum from_partials(std::vector<double> partials);

  friend bool operator==(const ExactSum&, const ExactSum&) = default;

 private:
  std::vector<double> partials_;
};

struct CountState {
  std::uint64_t n = 0;
  friend bool operator==(const CountState&, const CountState&) = default;
};

struct SumCountState {
  ColumnType type = ColumnType::Int64;
  std::int64_t int_sum = 0;  // Int64 columns, wraps modulo 2^64
  ExactSum float_sum;        // Float64 columns
  std::uint64_t n = 0;
  friend bool operator==(const SumCountState&, const SumCountState&) = default;
};

struct MinState {
  std::optional<Scalar> v;
  friend bool operator==(const MinState&, const MinState&) = default;
};

struct MaxState {
  std::optional<Scalar> v;
  friend bool operator==(const MaxState&, const MaxState&) = default;
};

/// Gathered column values for exact holistic aggregates, ascending.
struct ValuesState {
  std::vector<double> sorted;
  friend bool operator==(const ValuesState&, const ValuesState&) = default;
};

/// Fixed-width histogram over [lo, hi] with under/overflow counters.
/// Invariant: n == sum(counts) + below + above.
struct HistogramState {
  double lo = 0;
  double hi = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;
  std::uint64_t below = 0;
  std::uint64_t above = 0;

  static HistogramState empty(const HistogramParams& params);
  void add(double v);
  double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
  double bin_midpoint(std::size_t bin) const;
  friend bool operator==(const HistogramState&, const HistogramState&) = default;
};

using PartialAggState = std::variant<CountState, SumCountState, MinState, MaxState, ValuesState, HistogramState>;

/// Partial state for one object: `spec` applied to `rows` of `table`.
/// median_approx needs histogram params.
PartialAggState accumulate(const AggSpec& spec, const Table& table, std::span<const std::uint32_t> rows,
                           const std::optional<HistogramParams>& histogram = std::nullopt);

/// The state of an empty input for `spec`.
PartialAggState identity_state(const AggSpec& spec, ColumnType column_type,
                               const std::optional<HistogramParams>& histogram = std::nullopt);

/// Combines two states of the same variant. Throws MixedVariants or HistogramParamMismatch.
PartialAggState merge(const PartialAggState& a, const PartialAggState& b);

/// Final value of a merged state. Throws EmptyInput for avg/median/min/max over zero rows.
Scalar finalize(const AggSpec& spec, const PartialAggState& state);

/// Folds `parts` left to right and finalizes; zero parts means zero rows.
Scalar merge_agg(const AggSpec& spec, ColumnType column_type, std::span<const PartialAggState> parts);

/// Result type of `spec` applied to a column of `column_type`.
ColumnType result_type(const AggSpec& spec, ColumnType column_type);
/// Throws TypeMismatch when `spec` cannot apply to the column type.
void check_agg_column(const AggSpec& spec, ColumnType column_type);

/// median_approx readout: for odd n the midpoint of the first bin whose cumulative
/// count reaches ceil(n/2); for even n the mean of the midpoints holding ranks
/// n/2 and n/2+1.
double histogram_median(const HistogramState& h);

void encode_state(const PartialAggState& state, ByteWriter& w);
PartialAggState decode_state(ByteReader& r);

}  // namespace skyshard
