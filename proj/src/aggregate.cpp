#include "skyshard/aggregate.hpp"

#include <algorithm>
#include <cmath>

namespace skyshard {

std::string format_scalar(const Scalar& s) {
  if (auto* i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
  return format_double(std::get<double>(s));
}

// Shewchuk-style partials, as in CPython's math.fsum.
void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    double hi = x + y;
    double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::add(const ExactSum& other) {
  for (double p : other.partials_) add(p);
}

double ExactSum::value() const {
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials_[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round-half-even correction when the remaining partials push past a tie.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    double y = lo * 2.0;
    double x = hi + y;
    double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

ExactSum ExactSum::from_partials(std::vector<double> partials) {
  ExactSum s;
  for (double p : partials) s.add(p);
  return s;
}

HistogramState HistogramState::empty(const HistogramParams& params) {
  if (params.bins == 0) fail(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  if (!(params.lo <= params.hi)) fail(ErrorCode::InvalidArgument, "histogram range has lo > hi");
  HistogramState h;
  h.lo = params.lo;
  h.hi = params.hi;
  h.counts.assign(params.bins, 0);
  return h;
}

void HistogramState::add(double v) {
  ++n;
  if (v < lo) {
    ++below;
  } else if (v > hi) {
    ++above;
  } else {
    std::size_t bin = 0;
    double width = bin_width();
    if (width > 0) {
      double pos = std::floor((v - lo) / width);
      bin = pos < 0 ? 0 : std::min(static_cast<std::size_t>(pos), counts.size() - 1);
    }
    ++counts[bin];
  }
}

double HistogramState::bin_midpoint(std::size_t bin) const {
  return lo + (static_cast<double>(bin) + 0.5) * bin_width();
}

namespace {

template <class F>
void for_each_numeric(const Table& table, std::size_t col, std::span<const std::uint32_t> rows, F&& f) {
  std::visit([&](const auto& vec) {
    using T = typename std::decay_t<decltype(vec)>::value_type;
    if constexpr (!std::is_same_v<T, std::string>) {
      for (auto r : rows) f(vec[r]);
    }
  }, table.column(col));
}

bool scalar_less(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) fail(ErrorCode::MixedVariants, "min/max states of different value types");
  return a < b;
}

template <class State>
const State& expect(const PartialAggState& s, const char* what) {
  if (auto* p = std::get_if<State>(&s)) return *p;
  fail(ErrorCode::MixedVariants, std::string("expected ") + what + " state");
}

}  // namespace

void check_agg_column(const AggSpec& spec, ColumnType column_type) {
  if (spec.fn != AggFn::Count && !is_numeric(column_type)) {
    fail(ErrorCode::TypeMismatch,
         std::string(agg_name(spec.fn)) + " requires a numeric column, '" + spec.column + "' is utf8");
  }
  if (spec.fn == AggFn::MedianApprox && spec.bins == 0) fail(ErrorCode::InvalidArgument, "BINS must be positive");
}

ColumnType result_type(const AggSpec& spec, ColumnType column_type) {
  switch (spec.fn) {
    case AggFn::Count: return ColumnType::Int64;
    case AggFn::Sum:
    case AggFn::Min:
    case AggFn::Max: return column_type;
    default: return ColumnType::Float64;
  }
}

PartialAggState identity_state(const AggSpec& spec, ColumnType column_type,
                               const std::optional<HistogramParams>& histogram) {
  check_agg_column(spec, column_type);
  switch (spec.fn) {
    case AggFn::Count: return CountState{};
    case AggFn::Sum:
    case AggFn::Avg: return SumCountState{column_type, 0, {}, 0};
    case AggFn::Min: return MinState{};
    case AggFn::Max: return MaxState{};
    case AggFn::Median: return ValuesState{};
    case AggFn::MedianApprox:
      if (!histogram) fail(ErrorCode::InvalidArgument, "median_approx needs histogram parameters");
      return HistogramState::empty(*histogram);
  }
  fail(ErrorCode::Internal, "unhandled aggregate");
}

PartialAggState accumulate(const AggSpec& spec, const Table& table, std::span<const std::uint32_t> rows,
                           const std::optional<HistogramParams>& histogram) {
  std::size_t col = table.schema().index_of(spec.column);
  ColumnType type = table.schema()[col].type;
  PartialAggState state = identity_state(spec, type, histogram);
  std::visit([&](auto& s) {
    using S = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<S, CountState>) {
      s.n = rows.size();
    } else if constexpr (std::is_same_v<S, SumCountState>) {
      s.n = rows.size();
      for_each_numeric(table, col, rows, [&](auto v) {
        if constexpr (std::is_same_v<decltype(v), std::int64_t>) {
          s.int_sum = static_cast<std::int64_t>(static_cast<std::uint64_t>(s.int_sum) + static_cast<std::uint64_t>(v));
        } else {
          s.float_sum.add(v);
        }
      });
    } else if constexpr (std::is_same_v<S, MinState> || std::is_same_v<S, MaxState>) {
      for_each_numeric(table, col, rows, [&](auto v) {
        Scalar x = v;
        if (!s.v) {
          s.v = x;
        } else if constexpr (std::is_same_v<S, MinState>) {
          if (x < *s.v) s.v = x;
        } else {
          if (*s.v < x) s.v = x;
        }
      });
    } else if constexpr (std::is_same_v<S, ValuesState>) {
      s.sorted.reserve(rows.size());
      for_each_numeric(table, col, rows, [&](auto v) { s.sorted.push_back(static_cast<double>(v)); });
      std::sort(s.sorted.begin(), s.sorted.end());
    } else if constexpr (std::is_same_v<S, HistogramState>) {
      for_each_numeric(table, col, rows, [&](auto v) { s.add(static_cast<double>(v)); });
    }
  }, state);
  return state;
}

PartialAggState merge(const PartialAggState& a, const PartialAggState& b) {
  if (a.index() != b.index()) fail(ErrorCode::MixedVariants, "cannot merge partial states of different kinds");
  return std::visit([&](const auto& x) -> PartialAggState {
    using S = std::decay_t<decltype(x)>;
    const S& y = std::get<S>(b);
    if constexpr (std::is_same_v<S, CountState>) {
      return CountState{x.n + y.n};
    } else if constexpr (std::is_same_v<S, SumCountState>) {
      if (x.type != y.type) fail(ErrorCode::MixedVariants, "sum states over different column types");
      SumCountState out = x;
      out.int_sum = static_cast<std::int64_t>(static_cast<std::uint64_t>(x.int_sum) + static_cast<std::uint64_t>(y.int_sum));
      out.float_sum.add(y.float_sum);
      out.n = x.n + y.n;
      return out;
    } else if constexpr (std::is_same_v<S, MinState>) {
      if (!x.v) return y;
      if (!y.v) return x;
      return scalar_less(*y.v, *x.v) ? y : x;
    } else if constexpr (std::is_same_v<S, MaxState>) {
      if (!x.v) return y;
      if (!y.v) return x;
      return scalar_less(*x.v, *y.v) ? y : x;
    } else if constexpr (std::is_same_v<S, ValuesState>) {
      ValuesState out;
      out.sorted.resize(x.sorted.size() + y.sorted.size());
      std::merge(x.sorted.begin(), x.sorted.end(), y.sorted.begin(), y.sorted.end(), out.sorted.begin());
      return out;
    } else {
      if (x.lo != y.lo || x.hi != y.hi || x.counts.size() != y.counts.size()) {
        fail(ErrorCode::HistogramParamMismatch, "histograms differ in (lo, hi, bins)");
      }
      HistogramState out = x;
      for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += y.counts[i];
      out.n += y.n;
      out.below += y.below;
      out.above += y.above;
      return out;
    }
  }, a);
}

double histogram_median(const HistogramState& h) {
  if (h.n == 0) fail(ErrorCode::EmptyInput, "median_approx over zero rows");
  auto value_at_rank = [&](std::uint64_t rank) {
    std::uint64_t cum = h.below;
    if (cum >= rank) return h.lo;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      cum += h.counts[b];
      if (cum >= rank) return h.bin_midpoint(b);
    }
    return h.hi;
  };
  if (h.n % 2 == 1) return value_at_rank((h.n + 1) / 2);
  return (value_at_rank(h.n / 2) + value_at_rank(h.n / 2 + 1)) / 2.0;
}

Scalar finalize(const AggSpec& spec, const PartialAggState& state) {
  auto empty = [&]() -> Scalar { fail(ErrorCode::EmptyInput, std::string(agg_name(spec.fn)) + " over zero rows"); };
  switch (spec.fn) {
    case AggFn::Count: return static_cast<std::int64_t>(expect<CountState>(state, "count").n);
    case AggFn::Sum: {
      const auto& s = expect<SumCountState>(state, "sum");
      if (s.type == ColumnType::Int64) return s.int_sum;
      return s.float_sum.value();
    }
    case AggFn::Avg: {
      const auto& s = expect<SumCountState>(state, "sum");
      if (s.n == 0) return empty();
      double total = s.type == ColumnType::Int64 ? static_cast<double>(s.int_sum) : s.float_sum.value();
      return total / static_cast<double>(s.n);
    }
    case AggFn::Min: {
      const auto& s = expect<MinState>(state, "min");
      if (!s.v) return empty();
      return *s.v;
    }
    case AggFn::Max: {
      const auto& s = expect<MaxState>(state, "max");
      if (!s.v) return empty();
      return *s.v;
    }
    case AggFn::Median: {
      const auto& v = expect<ValuesState>(state, "values").sorted;
      if (v.empty()) return empty();
      std::size_t mid = v.size() / 2;
      if (v.size() % 2 == 1) return v[mid];
      return (v[mid - 1] + v[mid]) / 2.0;
    }
    case AggFn::MedianApprox: return histogram_median(expect<HistogramState>(state, "histogram"));
  }
  fail(ErrorCode::Internal, "unhandled aggregate");
}

Scalar merge_agg(const AggSpec& spec, ColumnType column_type, std::span<const PartialAggState> parts) {
  if (parts.empty()) {
    if (spec.fn == AggFn::MedianApprox) fail(ErrorCode::EmptyInput, "median_approx over zero rows");
    return finalize(spec, identity_state(spec, column_type));
  }
  PartialAggState acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = merge(acc, parts[i]);
  return finalize(spec, acc);
}

// ---------------------------------------------------------------------------
// Wire layout

namespace {

void write_scalar(ByteWriter& w, const Scalar& s) {
  w.u8(static_cast<std::uint8_t>(s.index()));
  if (auto* i = std::get_if<std::int64_t>(&s)) {
    w.i64(*i);
  } else {
    w.f64(std::get<double>(s));
  }
}

Scalar read_scalar(ByteReader& r) {
  auto t = r.u8("scalar type");
  if (t == 0) return r.i64("scalar");
  if (t == 1) return r.f64("scalar");
  fail(ErrorCode::DecodeFailed, "bad scalar type tag");
}

}  // namespace

void encode_state(const PartialAggState& state, ByteWriter& w) {
  w.u8(static_cast<std::uint8_t>(state.index()));
  std::visit([&](const auto& s) {
    using S = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<S, CountState>) {
      w.u64(s.n);
    } else if constexpr (std::is_same_v<S, SumCountState>) {
      w.u8(static_cast<std::uint8_t>(s.type));
      if (s.type == ColumnType::Int64) {
        w.i64(s.int_sum);
      } else {
        w.u32(static_cast<std::uint32_t>(s.float_sum.partials().size()));
        for (double p : s.float_sum.partials()) w.f64(p);
      }
      w.u64(s.n);
    } else if constexpr (std::is_same_v<S, MinState> || std::is_same_v<S, MaxState>) {
      w.u8(s.v ? 1 : 0);
      if (s.v) write_scalar(w, *s.v);
    } else if constexpr (std::is_same_v<S, ValuesState>) {
      w.u64(s.sorted.size());
      for (double v : s.sorted) w.f64(v);
    } else {
      w.f64(s.lo);
      w.f64(s.hi);
      w.u32(static_cast<std::uint32_t>(s.counts.size()));
      for (auto c : s.counts) w.u64(c);
      w.u64(s.n);
      w.u64(s.below);
      w.u64(s.above);
    }
  }, state);
}

PartialAggState decode_state(ByteReader& r) {
  auto tag = r.u8("state tag");
  switch (tag) {
    case 0: return CountState{r.u64("count")};
    case 1: {
      SumCountState s;
      auto t = r.u8("sum type");
      if (t > 1) fail(ErrorCode::DecodeFailed, "bad sum type");
      s.type = static_cast<ColumnType>(t);
      if (s.type == ColumnType::Int64) {
        s.int_sum = r.i64("sum");
      } else {
        auto n = r.u32("partials");
        if (n > r.remaining() / 8) fail(ErrorCode::Truncated, "truncated at partials");
        std::vector<double> parts(n);
        for (auto& p : parts) p = r.f64("partials");
        s.float_sum = ExactSum::from_partials(std::move(parts));
      }
      s.n = r.u64("sum count");
      return s;
    }
    case 2:
    case 3: {
      std::optional<Scalar> v;
      if (r.u8("min/max present")) v = read_scalar(r);
      if (tag == 2) return MinState{v};
      return MaxState{v};
    }
    case 4: {
      auto n = r.u64("values");
      if (n > r.remaining() / 8) fail(ErrorCode::Truncated, "truncated at values");
      ValuesState s;
      s.sorted.resize(n);
      for (auto& v : s.sorted) v = r.f64("values");
      return s;
    }
    case 5: {
      HistogramState h;
      h.lo = r.f64("histogram lo");
      h.hi = r.f64("histogram hi");
      auto bins = r.u32("histogram bins");
      if (bins > r.remaining() / 8) fail(ErrorCode::Truncated, "truncated at histogram counts");
      h.counts.resize(bins);
      for (auto& c : h.counts) c = r.u64("histogram counts");
      h.n = r.u64("histogram n");
      h.below = r.u64("histogram below");
      h.above = r.u64("histogram above");
      return h;
    }
    default: fail(ErrorCode::DecodeFailed, "unknown partial state tag " + std::to_string(tag));
  }
}

}  // namespace skyshard
