#include "skyshard/catalog.hpp"

#include <bit>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>

namespace skyshard {

using nlohmann::json;

PartitionMap DatasetInfo::partition_map() const {
  PartitionMap pm;
  pm.dataset = name;
  for (const auto& o : objects) {
    PartitionEntry e;
    e.name = o.name;
    e.node_id = o.node_id;
    if (array) {
      e.range = o.coords;
    } else {
      e.range = o.rows;
    }
    pm.entries.push_back(std::move(e));
  }
  return pm;
}

namespace {

// Float64 bounds are stored as their IEEE bit pattern so they survive exactly.
json value_json(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return json{{"f64bits", std::bit_cast<std::uint64_t>(*d)}};
  return std::get<std::string>(v);
}

Value value_from(const json& j, ColumnType type) {
  switch (type) {
    case ColumnType::Int64: return j.get<std::int64_t>();
    case ColumnType::Float64: return std::bit_cast<double>(j.at("f64bits").get<std::uint64_t>());
    case ColumnType::Utf8: return j.get<std::string>();
  }
  return {};
}

json extents_json(const Extents& e) { return json(e); }

json dataset_json(const DatasetInfo& d) {
  json j;
  j["kind"] = d.kind == ObjectKind::ArrayChunk ? "array" : "table";
  j["schema"] = d.schema.to_text();
  j["num_rows"] = d.num_rows;
  if (d.array) {
    j["array"] = {{"dtype", type_name(d.array->dtype)},
                  {"shape", extents_json(d.array->shape)},
                  {"chunk_shape", extents_json(d.array->chunk_shape)}};
  }
  j["indexed_columns"] = json(std::vector<std::string>(d.indexed_columns.begin(), d.indexed_columns.end()));
  json objs = json::array();
  for (const auto& o : d.objects) {
    json oj;
    oj["partition"] = o.name.partition_index;
    oj["node"] = o.node_id;
    if (d.array) {
      oj["coords"] = extents_json(o.coords);
    } else {
      oj["rows"] = {o.rows.begin, o.rows.end};
    }
    if (!o.zone_map.empty()) {
      json zm = json::array();
      for (const auto& z : o.zone_map) {
        zm.push_back(z ? json{value_json(z->min), value_json(z->max)} : json(nullptr));
      }
      oj["zone_map"] = std::move(zm);
    }
    objs.push_back(std::move(oj));
  }
  j["objects"] = std::move(objs);
  return j;
}

DatasetInfo dataset_from(const std::string& name, const json& j) {
  DatasetInfo d;
  d.name = name;
  d.kind = j.at("kind").get<std::string>() == "array" ? ObjectKind::ArrayChunk : ObjectKind::TableShard;
  d.schema = Schema::parse(j.at("schema").get<std::string>());
  d.num_rows = j.at("num_rows").get<std::uint64_t>();
  if (j.contains("array")) {
    const auto& a = j["array"];
    ArraySpec spec;
    spec.dtype = parse_type_name(a.at("dtype").get<std::string>());
    spec.shape = a.at("shape").get<Extents>();
    spec.chunk_shape = a.at("chunk_shape").get<Extents>();
    d.array = spec;
  }
  for (const auto& c : j.at("indexed_columns")) d.indexed_columns.insert(c.get<std::string>());
  for (const auto& oj : j.at("objects")) {
    ObjectMeta o;
    o.name = ObjectName{name, oj.at("partition").get<std::uint64_t>()};
    o.node_id = oj.at("node").get<std::string>();
    if (d.array) {
      o.coords = oj.at("coords").get<Extents>();
    } else {
      o.rows = RowRange{oj.at("rows").at(0).get<std::uint64_t>(), oj.at("rows").at(1).get<std::uint64_t>()};
    }
    if (oj.contains("zone_map")) {
      const auto& zm = oj["zone_map"];
      if (zm.size() != d.schema.size()) throw std::runtime_error("zone map width differs from schema");
      for (std::size_t c = 0; c < zm.size(); ++c) {
        if (zm[c].is_null()) {
          o.zone_map.push_back(std::nullopt);
        } else {
          o.zone_map.push_back(ZoneEntry{value_from(zm[c].at(0), d.schema[c].type), value_from(zm[c].at(1), d.schema[c].type)});
        }
      }
    }
    d.objects.push_back(std::move(o));
  }
  return d;
}

json catalog_json(const std::map<std::string, DatasetInfo>& datasets) {
  json j;
  j["version"] = Catalog::kVersion;
  j["datasets"] = json::object();
  for (const auto& [name, d] : datasets) j["datasets"][name] = dataset_json(d);
  return j;
}

}  // namespace

Catalog::Catalog(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;
  std::stringstream ss;
  ss << in.rdbuf();
  datasets_ = parse_json_text(ss.str());
}

std::map<std::string, DatasetInfo> Catalog::parse_json_text(const std::string& text) {
  std::map<std::string, DatasetInfo> out;
  try {
    json j = json::parse(text);
    int version = j.at("version").get<int>();
    if (version > kVersion) fail(ErrorCode::BadConfig, "catalog version " + std::to_string(version) + " is newer than supported");
    for (const auto& [name, dj] : j.at("datasets").items()) out.emplace(name, dataset_from(name, dj));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::BadConfig, std::string("unreadable catalog: ") + e.what());
  }
  return out;
}

std::string Catalog::to_json_text() const {
  std::shared_lock lock(mu_);
  return catalog_json(datasets_).dump(1);
}

void Catalog::save_locked() const {
  if (file_.empty()) return;
  json j = catalog_json(datasets_);
  auto tmp = file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(1) << '\n';
    if (!out) fail(ErrorCode::IoError, "cannot write catalog " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file_, ec);
  if (ec) fail(ErrorCode::IoError, "cannot replace catalog " + file_.string() + ": " + ec.message());
}

std::optional<DatasetInfo> Catalog::find(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = datasets_.find(name);
  if (it == datasets_.end()) return std::nullopt;
  return it->second;
}

DatasetInfo Catalog::get(const std::string& name) const {
  auto d = find(name);
  if (!d) fail(ErrorCode::UnknownDataset, "unknown dataset '" + name + "'");
  return std::move(*d);
}

void Catalog::put(DatasetInfo info) {
  std::unique_lock lock(mu_);
  std::string name = info.name;
  datasets_[name] = std::move(info);
  save_locked();
}

void Catalog::remove(const std::string& name) {
  std::unique_lock lock(mu_);
  if (datasets_.erase(name)) save_locked();
}

void Catalog::set_indexed(const std::string& name, const std::string& column, bool indexed) {
  std::unique_lock lock(mu_);
  auto it = datasets_.find(name);
  if (it == datasets_.end()) fail(ErrorCode::UnknownDataset, "unknown dataset '" + name + "'");
  if (indexed) {
    it->second.indexed_columns.insert(column);
  } else {
    it->second.indexed_columns.erase(column);
  }
  save_locked();
}

std::vector<std::string> Catalog::names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, d] : datasets_) out.push_back(name);
  return out;
}

}  // namespace skyshard
