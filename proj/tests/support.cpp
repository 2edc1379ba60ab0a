#include "support.hpp"

#include "oracle.hpp"
#include "skyshard/array_facade.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace skyshard::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "skyshard-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Schema random_schema(Rng& rng) {
  std::vector<Column> cols{{"c0", ColumnType::Int64}};
  std::uniform_int_distribution<int> ncols(0, 3), type(0, 2);
  int extra = ncols(rng);
  for (int i = 1; i <= extra; ++i) cols.push_back({"c" + std::to_string(i), static_cast<ColumnType>(type(rng))});
  return Schema(std::move(cols));
}

Value random_value(Rng& rng, ColumnType t) {
  switch (t) {
    case ColumnType::Int64: return std::uniform_int_distribution<std::int64_t>(-50, 50)(rng);
    case ColumnType::Float64: {
      // Mix of coarse values (ties) and full-precision ones.
      if (rng() % 3 == 0) return static_cast<double>(std::uniform_int_distribution<int>(-20, 20)(rng)) / 4.0;
      return std::uniform_real_distribution<double>(-1000.0, 1000.0)(rng);
    }
    case ColumnType::Utf8: {
      static const char* words[] = {"alpha", "beta", "gamma", "delta", "", "ünïcødé", "o'neil", "x"};
      return std::string(words[rng() % 8]);
    }
  }
  return {};
}

Table random_table(Rng& rng, const Schema& schema, std::size_t rows) {
  Table t(schema);
  std::vector<Value> row(schema.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) row[c] = random_value(rng, schema[c].type);
    t.append_row(row);
  }
  return t;
}

Predicate random_predicate(Rng& rng, const Table& table, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  int k = pick(rng);
  if (depth > 0 && k < 4) {
    std::vector<Predicate> kids;
    int n = 2 + static_cast<int>(rng() % 2);
    for (int i = 0; i < n; ++i) kids.push_back(random_predicate(rng, table, depth - 1));
    if (k < 2) return Predicate::all_of(std::move(kids));
    return Predicate::any_of(std::move(kids));
  }
  if (depth > 0 && k == 4) return Predicate::negate(random_predicate(rng, table, depth - 1));
  if (k == 5 && rng() % 4 == 0) return Predicate::always();
  const Schema& s = table.schema();
  std::size_t col = rng() % s.size();
  ColumnType t = s[col].type;
  Value lit = (table.num_rows() > 0 && rng() % 3 != 0) ? table.value(rng() % table.num_rows(), col)
                                                       : random_value(rng, t);
  CompareOp op;
  if (t == ColumnType::Utf8) {
    op = rng() % 2 ? CompareOp::Eq : CompareOp::Ne;
  } else {
    op = static_cast<CompareOp>(rng() % 6);
  }
  // Integer literals against Float64 columns exercise literal conversion.
  if (t == ColumnType::Float64 && rng() % 5 == 0) lit = static_cast<std::int64_t>(std::get<double>(lit));
  return Predicate::compare(s[col].name, op, lit);
}

Query random_query(Rng& rng, const std::string& dataset, const Table& table) {
  Query q;
  q.dataset = dataset;
  q.predicate = random_predicate(rng, table);
  const Schema& s = table.schema();
  int k = static_cast<int>(rng() % 10);
  if (k < 4) return q;  // SELECT *
  if (k < 6) {
    std::vector<std::string> cols;
    for (const auto& c : s.columns()) {
      if (rng() % 2) cols.push_back(c.name);
    }
    if (cols.empty()) cols.push_back(s[rng() % s.size()].name);
    std::shuffle(cols.begin(), cols.end(), rng);
    q.projection = Projection::of(cols);
    return q;
  }
  std::vector<std::string> numeric;
  for (const auto& c : s.columns()) {
    if (c.type != ColumnType::Utf8) numeric.push_back(c.name);
  }
  static const AggFn fns[] = {AggFn::Count, AggFn::Sum, AggFn::Min, AggFn::Max, AggFn::Avg, AggFn::Median};
  AggFn fn = fns[rng() % 6];
  std::string col = fn == AggFn::Count ? s[rng() % s.size()].name : numeric[rng() % numeric.size()];
  q.aggregate = AggSpec{fn, col};
  return q;
}

std::string compare_with_oracle(Driver& driver, const Query& q, const Table& table) {
  std::string text = to_text(q);
  if (!q.aggregate) {
    Table expect = oracle::select(table, q);
    Table got;
    try {
      got = std::get<Table>(driver.execute(q));
    } catch (const std::exception& e) {
      return text + ": driver threw " + e.what();
    }
    if (!(got == expect)) {
      return text + ": rows differ (driver " + std::to_string(got.num_rows()) + " rows, oracle " +
             std::to_string(expect.num_rows()) + ")";
    }
    return {};
  }
  std::optional<Scalar> expect = oracle::aggregate(table, q);
  try {
    Scalar got = std::get<Scalar>(driver.execute(q));
    if (!expect) return text + ": oracle says undefined, driver returned " + format_scalar(got);
    if (got.index() != expect->index() || format_scalar(got) != format_scalar(*expect) || !(got == *expect)) {
      return text + ": driver " + format_scalar(got) + ", oracle " + format_scalar(*expect);
    }
  } catch (const Error& e) {
    if (!expect && e.code() == ErrorCode::EmptyInput) return {};
    return text + ": driver threw " + e.what();
  }
  return {};
}

namespace {

// Row-major dense mirror of an array, indexed independently of the chunk code.
template <class T>
struct Dense {
  Extents shape;
  std::vector<T> cells;

  std::uint64_t flat(const Extents& idx) const {
    std::uint64_t f = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) f = f * shape[d] + idx[d];
    return f;
  }
  // Visits every index of the slab in row-major order.
  template <class F>
  void each(const Hyperslab& s, F&& fn) const {
    Extents idx = s.offset;
    std::uint64_t n = s.num_cells();
    for (std::uint64_t i = 0; i < n; ++i) {
      fn(idx, i);
      for (std::size_t d = shape.size(); d-- > 0;) {
        if (++idx[d] < s.offset[d] + s.shape[d]) break;
        idx[d] = s.offset[d];
      }
    }
  }
};

Hyperslab random_slab(Rng& rng, const Extents& shape) {
  Hyperslab s;
  for (auto e : shape) {
    std::uint64_t a = rng() % e, b = rng() % e;
    if (a > b) std::swap(a, b);
    s.offset.push_back(a);
    s.shape.push_back(b - a + 1);
  }
  return s;
}

template <class T>
std::string run_array_trial(Driver& driver, Rng& rng, const std::string& name, ArraySpec spec) {
  ArrayStore store(driver);
  store.create_array(name, spec);
  Dense<T> dense{spec.shape, std::vector<T>(spec.num_cells(), T{})};
  auto full = Hyperslab{Extents(spec.rank(), 0), spec.shape};
  auto compare = [&](const Hyperslab& slab, const std::vector<T>& got, const char* what) -> std::string {
    std::string diff;
    dense.each(slab, [&](const Extents& idx, std::uint64_t i) {
      if (diff.empty() && !(got[i] == dense.cells[dense.flat(idx)])) {
        diff = std::string(what) + " mismatch at cell " + std::to_string(dense.flat(idx));
      }
    });
    return diff;
  };
  // fill values before any write
  if (auto d = compare(full, store.read_hyperslab<T>(name, full), "initial read"); !d.empty()) return d;
  int steps = 3 + static_cast<int>(rng() % 8);
  for (int s = 0; s < steps; ++s) {
    Hyperslab slab = random_slab(rng, spec.shape);
    if (rng() % 3) {
      std::vector<T> data(slab.num_cells());
      for (auto& v : data) {
        if constexpr (std::is_same_v<T, double>) {
          v = std::uniform_real_distribution<double>(-100, 100)(rng);
        } else {
          v = std::uniform_int_distribution<std::int64_t>(-1000000, 1000000)(rng);
        }
      }
      store.write_hyperslab<T>(name, slab, data);
      dense.each(slab, [&](const Extents& idx, std::uint64_t i) { dense.cells[dense.flat(idx)] = data[i]; });
    } else if (auto d = compare(slab, store.read_hyperslab<T>(name, slab), "slab read"); !d.empty()) {
      return d;
    }
  }
  return compare(full, store.read_hyperslab<T>(name, full), "final read");
}

}  // namespace

std::string array_oracle_trial(Driver& driver, Rng& rng, const std::string& name) {
  ArraySpec spec;
  std::size_t rank = 1 + rng() % 3;
  for (std::size_t d = 0; d < rank; ++d) {
    std::uint64_t extent = 1 + rng() % (rank == 1 ? 40 : rank == 2 ? 12 : 6);
    spec.shape.push_back(extent);
    spec.chunk_shape.push_back(1 + rng() % extent);
  }
  if (rng() % 2) {
    spec.dtype = ColumnType::Int64;
    return run_array_trial<std::int64_t>(driver, rng, name, spec);
  }
  spec.dtype = ColumnType::Float64;
  return run_array_trial<double>(driver, rng, name, spec);
}

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

std::vector<std::uint8_t> unhex(std::string_view text) {
  std::vector<std::uint8_t> out;
  int hi = -1;
  for (char c : text) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else {
      continue;
    }
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  return out;
}

std::vector<std::uint8_t> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace skyshard::testing
