#include "skyshard/driver.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>
#include <thread>

namespace skyshard {

Schema projected_schema(const Schema& schema, const Projection& projection) {
  std::vector<Column> cols;
  for (auto c : projection.resolve(schema)) cols.push_back(schema[c]);
  return Schema(std::move(cols));
}

Table merge_select(std::vector<std::pair<std::uint64_t, RowsResult>> parts, const Schema& schema) {
  std::stable_sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Table out(schema);
  for (auto& [partition, part] : parts) {
    if (part.rows.schema != schema) {
      fail(ErrorCode::SchemaMismatch, "partition " + std::to_string(partition) + " returned schema '" +
                                          part.rows.schema.to_text() + "', expected '" + schema.to_text() + "'");
    }
    Table t = unseal(part.rows);
    if (part.ordinals.size() != t.num_rows()) fail(ErrorCode::LengthMismatch, "ordinal count differs from row count");
    if (!std::is_sorted(part.ordinals.begin(), part.ordinals.end())) {
      std::vector<std::uint32_t> perm(t.num_rows());
      std::iota(perm.begin(), perm.end(), 0u);
      std::stable_sort(perm.begin(), perm.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return part.ordinals[a] < part.ordinals[b]; });
      t = t.take(perm);
    }
    out.append(t);
  }
  return out;
}

Driver::Driver(std::vector<std::shared_ptr<NodeClient>> nodes, std::shared_ptr<Catalog> catalog, DriverOptions options)
    : catalog_(std::move(catalog)), options_(options) {
  for (auto& n : nodes) {
    std::string id = n->node_id();
    if (!nodes_.emplace(id, std::move(n)).second) fail(ErrorCode::InvalidArgument, "duplicate node id '" + id + "'");
  }
  if (!catalog_) catalog_ = std::make_shared<Catalog>();
  if (options_.fanout == 0) options_.fanout = 1;
}

std::vector<std::string> Driver::node_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, n] : nodes_) ids.push_back(id);
  return ids;
}

NodeClient& Driver::node(const std::string& node_id) {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) fail(ErrorCode::InvalidArgument, "unknown node '" + node_id + "'");
  return *it->second;
}

void Driver::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const {
  std::size_t workers = std::min(n, options_.fanout);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      if (stop) return;
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

template <class F>
auto with_retry(F&& f, std::atomic<std::size_t>* retries = nullptr) {
  try {
    return f();
  } catch (const Error&) {
    if (retries) ++*retries;
    return f();
  }
}

}  // namespace

PartitionMap Driver::write_table(const std::string& dataset, const Table& table, const PartitionPolicy& policy,
                                 bool overwrite) {
  check_dataset_name(dataset);
  policy.validate();
  if (!overwrite && catalog_->find(dataset)) fail(ErrorCode::DatasetExists, "dataset '" + dataset + "' exists");

  std::vector<Table> shards = partition_table(table, policy);
  std::vector<ObjectName> names;
  for (std::size_t i = 0; i < shards.size(); ++i) names.push_back(ObjectName{dataset, i});
  std::vector<std::string> ids = node_ids();
  PartitionMap pm = names.empty() ? PartitionMap{dataset, {}} : place_objects(names, ids);

  DatasetInfo info;
  info.name = dataset;
  info.kind = ObjectKind::TableShard;
  info.schema = table.schema();
  info.num_rows = table.num_rows();
  info.objects.resize(shards.size());

  std::mutex mu;
  std::vector<std::string> failures;
  ErrorCode first_code = ErrorCode::NodeUnreachable;
  std::atomic<std::size_t> stored{0};
  std::uint64_t begin = 0;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    ObjectMeta& m = info.objects[i];
    m.name = names[i];
    m.node_id = pm.entries[i].node_id;
    m.rows = RowRange{begin, begin + shards[i].num_rows()};
    pm.entries[i].range = m.rows;
    begin = m.rows.end;
  }
  // Failures are collected rather than thrown so the report names every failed object.
  parallel_for(shards.size(), [&](std::size_t i) {
    ObjectMeta& m = info.objects[i];
    SealedObject obj = seal(shards[i]);
    m.zone_map = obj.zone_map;
    Bytes bytes = encode_object(obj);
    try {
      with_retry([&] { node(m.node_id).put_object(m.name, bytes); });
      ++stored;
    } catch (const Error& e) {
      std::lock_guard lock(mu);
      if (failures.empty()) first_code = e.code();
      failures.push_back(m.name.render() + " at node " + m.node_id + ": " + e.what());
    }
  });
  if (!failures.empty()) {
    std::string msg = "write of '" + dataset + "' failed after retry; " + std::to_string(stored.load()) + " of " +
                      std::to_string(shards.size()) + " objects stored; failed:";
    for (const auto& f : failures) msg += " [" + f + "]";
    fail(first_code, msg);
  }
  catalog_->put(std::move(info));
  return pm;
}

Plan Driver::plan(const Query& q, const std::optional<HistogramParams>& histogram) {
  DatasetInfo info = catalog_->get(q.dataset);
  if (info.kind != ObjectKind::TableShard) fail(ErrorCode::InvalidArgument, "'" + q.dataset + "' is an array dataset");
  Predicate bound = bind(q.predicate, info.schema);
  if (q.aggregate) {
    check_agg_column(*q.aggregate, info.schema[info.schema.index_of(q.aggregate->column)].type);
  } else {
    q.projection.resolve(info.schema);
  }

  Plan out;
  out.total_objects = info.objects.size();
  std::vector<const ObjectMeta*> candidates;
  for (const auto& o : info.objects) candidates.push_back(&o);

  if (options_.use_index) {
    for (const Predicate* eq : equality_conjuncts(bound)) {
      if (!info.indexed_columns.count(eq->column)) continue;
      std::set<std::string> owners;
      for (const auto* o : candidates) owners.insert(o->node_id);
      std::set<std::uint64_t> hits;
      bool usable = true;
      for (const auto& owner : owners) {
        try {
          for (const auto& h : node(owner).lookup_index(q.dataset, eq->column, eq->literal)) hits.insert(h.partition_index);
        } catch (const Error&) {
          // IndexMissing or an unreachable node: no elimination from this conjunct
          usable = false;
          break;
        }
      }
      if (!usable) continue;
      std::size_t before = candidates.size();
      std::erase_if(candidates, [&](const ObjectMeta* o) { return !hits.count(o->name.partition_index); });
      out.pruned_by_index += before - candidates.size();
    }
  }

  if (options_.use_zone_maps) {
    std::size_t before = candidates.size();
    std::erase_if(candidates, [&](const ObjectMeta* o) {
      return !o->zone_map.empty() && zone_map_excludes(bound, info.schema, o->zone_map);
    });
    out.pruned_by_zone_map = before - candidates.size();
  }

  SubQuery sq;
  sq.projection = q.aggregate ? Projection::star() : q.projection;
  sq.predicate = bound;
  sq.aggregate = q.aggregate;
  if (q.aggregate && q.aggregate->fn == AggFn::MedianApprox) sq.histogram = histogram;
  for (const auto* o : candidates) out.entries.push_back(PlanEntry{o->node_id, o->name, sq});
  return out;
}

std::vector<PartialResult> Driver::dispatch(const Plan& plan, QueryStats* stats) {
  std::vector<PartialResult> results(plan.entries.size());
  std::atomic<std::size_t> retries{0};
  parallel_for(plan.entries.size(), [&](std::size_t i) {
    const PlanEntry& e = plan.entries[i];
    try {
      results[i] = PartialResult{e.name.partition_index,
                                 with_retry([&] { return node(e.node_id).exec(e.name, e.sub_query); }, &retries)};
    } catch (const Error& err) {
      fail(ErrorCode::SubQueryFailed, "sub-query on " + e.name.render() + " at node " + e.node_id + " failed: " +
                                          std::string(to_string(err.code())) + ": " + err.what());
    }
  });
  if (stats) {
    stats->sub_queries += plan.entries.size();
    stats->retries += retries.load();
  }
  return results;
}

std::vector<PartialResult> Driver::run_round(const Query& q, const std::optional<HistogramParams>& h,
                                             QueryStats& stats) {
  Plan p = plan(q, h);
  stats.total_objects = p.total_objects;
  stats.pruned_by_index = p.pruned_by_index;
  stats.pruned_by_zone_map = p.pruned_by_zone_map;
  ++stats.rounds;
  return dispatch(p, &stats);
}

Table Driver::run_select(const Query& q, const DatasetInfo& info, QueryStats& stats) {
  Schema schema = projected_schema(info.schema, q.projection);
  auto parts = run_round(q, std::nullopt, stats);
  std::vector<std::pair<std::uint64_t, RowsResult>> rows;
  rows.reserve(parts.size());
  for (auto& p : parts) rows.emplace_back(p.partition_index, std::move(std::get<RowsResult>(p.result)));
  return merge_select(std::move(rows), schema);
}

Scalar Driver::run_aggregate(const Query& q, const DatasetInfo& info, QueryStats& stats) {
  const AggSpec& spec = *q.aggregate;
  ColumnType type = info.schema[info.schema.index_of(spec.column)].type;
  auto states = [](std::vector<PartialResult>& parts) {
    std::vector<PartialAggState> out;
    out.reserve(parts.size());
    for (auto& p : parts) out.push_back(std::move(std::get<PartialAggState>(p.result)));
    return out;
  };

  if (spec.fn != AggFn::MedianApprox) {
    auto parts = run_round(q, std::nullopt, stats);
    return merge_agg(spec, type, states(parts));
  }

  // Round 1: min and max over the same predicate fix the histogram range.
  check_agg_column(spec, type);
  Plan p = plan(Query{q.dataset, Projection::star(), q.predicate, AggSpec{AggFn::Min, spec.column}});
  stats.total_objects = p.total_objects;
  stats.pruned_by_index = p.pruned_by_index;
  stats.pruned_by_zone_map = p.pruned_by_zone_map;
  Plan both = p;
  for (auto e : p.entries) {
    e.sub_query.aggregate->fn = AggFn::Max;
    both.entries.push_back(std::move(e));
  }
  ++stats.rounds;
  auto bounds = dispatch(both, &stats);
  std::vector<PartialAggState> mins, maxs;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    (i < p.entries.size() ? mins : maxs).push_back(std::move(std::get<PartialAggState>(bounds[i].result)));
  }
  auto as_double = [](const Scalar& s) {
    return std::holds_alternative<double>(s) ? std::get<double>(s) : static_cast<double>(std::get<std::int64_t>(s));
  };
  double lo = as_double(merge_agg(AggSpec{AggFn::Min, spec.column}, type, mins));
  double hi = as_double(merge_agg(AggSpec{AggFn::Max, spec.column}, type, maxs));

  // Round 2: histograms.
  auto parts = run_round(q, HistogramParams{lo, hi, spec.bins}, stats);
  return merge_agg(spec, type, states(parts));
}

QueryResult Driver::execute(const Query& q, QueryStats* stats) {
  QueryStats local;
  QueryStats& st = stats ? *stats : local;
  st = QueryStats{};
  DatasetInfo info = catalog_->get(q.dataset);
  if (q.aggregate) return run_aggregate(q, info, st);
  return run_select(q, info, st);
}

QueryResult Driver::execute(std::string_view text, QueryStats* stats) { return execute(parse_query(text), stats); }

std::uint64_t Driver::build_index(const std::string& dataset, const std::string& column) {
  DatasetInfo info = catalog_->get(dataset);
  if (info.kind != ObjectKind::TableShard) fail(ErrorCode::InvalidArgument, "'" + dataset + "' is an array dataset");
  ColumnType type = info.schema[info.schema.index_of(column)].type;
  if (type == ColumnType::Float64) fail(ErrorCode::UnsupportedIndexType, "cannot index Float64 column '" + column + "'");
  std::atomic<std::uint64_t> total{0};
  parallel_for(info.objects.size(), [&](std::size_t i) {
    const ObjectMeta& o = info.objects[i];
    total += with_retry([&] { return node(o.node_id).build_index(o.name, column); });
  });
  catalog_->set_indexed(dataset, column, true);
  return total.load();
}

Bytes Driver::get_object(const ObjectName& name) {
  DatasetInfo info = catalog_->get(name.dataset);
  for (const auto& o : info.objects) {
    if (o.name == name) return with_retry([&] { return node(o.node_id).get_object(name); });
  }
  fail(ErrorCode::NotFound, "no object " + name.render() + " in catalog");
}

void Driver::compress_dataset(const std::string& dataset, CompressMode mode) {
  DatasetInfo info = catalog_->get(dataset);
  parallel_for(info.objects.size(), [&](std::size_t i) {
    const ObjectMeta& o = info.objects[i];
    with_retry([&] { return node(o.node_id).compress_object(o.name, mode); });
  });
}

}  // namespace skyshard
