// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolcache/cache.hpp"
#include "toolcache/common.hpp"

namespace toolcache {

// Object classes and land-cover labels available in every generated
// universe. Fixed lists keep answers recomputable from the records alone.
inline const std::vector<std::string>& object_classes() {
  static const std::vector<std::string> classes = {
      "airplane", "ship", "vehicle", "building", "storage_tank", "harbor"};
  return classes;
}

inline const std::vector<std::string>& landcover_labels() {
  static const std::vector<std::string> labels = {
      "urban", "forest", "water", "agriculture", "barren"};
  return labels;
}

struct Detection {
  std::string class_label;
  std::uint32_t count = 0;
};

struct ImageRecord {
  std::string filename;
  double lon = 0.0;
  double lat = 0.0;
  std::vector<Detection> detections;
  std::string timestamp_utc;  // ISO-8601, within the owning table's year

  int timestamp_year() const { return std::stoi(timestamp_utc.substr(0, 4)); }

  json to_json() const {
    json dets = json::array();
    for (const auto& d : detections) {
      dets.push_back({{"class", d.class_label}, {"count", d.count}});
    }
    return {{"filename", filename}, {"lon", lon}, {"lat", lat},
            {"detections", dets},   {"timestamp", timestamp_utc}};
  }

  static ImageRecord from_json(const json& j) {
    ImageRecord r;
    r.filename = j.at("filename").get<std::string>();
    r.lon = j.at("lon").get<double>();
    r.lat = j.at("lat").get<double>();
    for (const auto& d : j.at("detections")) {
      r.detections.push_back({d.at("class").get<std::string>(), d.at("count").get<std::uint32_t>()});
    }
    r.timestamp_utc = j.at("timestamp").get<std::string>();
    return r;
  }
};

// Land cover is a pure function of the record so any consumer (tools, model
// checker) recomputes the same label without extra stored state.
inline const std::string& landcover_label(const ImageRecord& record) {
  const auto& labels = landcover_labels();
  return labels[fnv1a64(record.filename) % labels.size()];
}

struct MetadataTable {
  CacheKey key;
  std::vector<ImageRecord> records;
  std::uint64_t size_bytes = 0;  // synthetic, informational; eviction is count-based
};

using TablePtr = std::shared_ptr<const MetadataTable>;

struct UniverseConfig {
  std::vector<std::string> datasets = {"xview1", "fair1m", "dota", "spacenet", "xbd"};
  std::vector<int> years = {2018, 2019, 2020, 2021, 2022, 2023};
  int min_records = 30;
  int max_records = 60;
  std::uint64_t seed = 1234;

  void validate() const {
    if (datasets.size() < 2) throw ConfigError("universe.datasets: need at least 2 datasets");
    if (years.size() < 2) throw ConfigError("universe.years: need at least 2 years");
    if (min_records < 1 || max_records < min_records) {
      throw ConfigError("universe.records: need 1 <= min_records <= max_records");
    }
  }

  json to_json() const {
    return {{"datasets", datasets}, {"years", years},         {"min_records", min_records},
            {"max_records", max_records}, {"seed", seed}};
  }

  static UniverseConfig from_json(const json& j) {
    UniverseConfig c;
    if (j.contains("datasets")) c.datasets = j.at("datasets").get<std::vector<std::string>>();
    if (j.contains("years")) c.years = j.at("years").get<std::vector<int>>();
    if (j.contains("min_records")) c.min_records = j.at("min_records").get<int>();
    if (j.contains("max_records")) c.max_records = j.at("max_records").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }
};

// Immutable after generation; shared read-only across concurrent episodes.
class Database {
 public:
  Database() = default;

  void insert(MetadataTable table) {
    const CacheKey key = table.key;
    tables_[key] = std::make_shared<const MetadataTable>(std::move(table));
  }

  TablePtr find(const CacheKey& key) const {
    auto it = tables_.find(key);
    return it == tables_.end() ? nullptr : it->second;
  }

  bool contains(const CacheKey& key) const { return tables_.count(key) > 0; }
  std::size_t size() const { return tables_.size(); }

  std::vector<CacheKey> keys() const {
    std::vector<CacheKey> out;
    out.reserve(tables_.size());
    for (const auto& [k, t] : tables_) out.push_back(k);
    return out;
  }

 private:
  std::map<CacheKey, TablePtr> tables_;
};

namespace detail {

inline double round6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::stod(buf);
}

inline std::string make_timestamp(Rng& rng, int year) {
  // Days capped at 28: no month-length or leap bookkeeping needed.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", year,
                static_cast<int>(next_int(rng, 1, 12)), static_cast<int>(next_int(rng, 1, 28)),
                static_cast<int>(next_int(rng, 0, 23)), static_cast<int>(next_int(rng, 0, 59)),
                static_cast<int>(next_int(rng, 0, 59)));
  return buf;
}

}  // namespace detail

inline MetadataTable generate_table(const CacheKey& key, const UniverseConfig& config) {
  Rng rng(derive_seed(config.seed, key.str()));
  MetadataTable table;
  table.key = key;
  // Yearly tables land in the 50-100 MB range.
  table.size_bytes = static_cast<std::uint64_t>(next_int(rng, 50'000'000, 100'000'000));
  const int n_records = static_cast<int>(next_int(rng, config.min_records, config.max_records));
  const auto& classes = object_classes();
  for (int i = 0; i < n_records; ++i) {
    ImageRecord r;
    char name[96];
    std::snprintf(name, sizeof(name), "%s_%04d_%06d.tif", key.dataset.c_str(), key.year, i);
    r.filename = name;
    r.lon = detail::round6(next_uniform(rng, -180.0, 180.0));
    r.lat = detail::round6(next_uniform(rng, -90.0, 90.0));
    std::vector<std::string> shuffled = classes;
    shuffle_in_place(shuffled, rng);
    const int n_classes = static_cast<int>(next_int(rng, 1, 3));
    for (int c = 0; c < n_classes; ++c) {
      r.detections.push_back({shuffled[static_cast<std::size_t>(c)],
                              static_cast<std::uint32_t>(next_int(rng, 0, 9))});
    }
    r.timestamp_utc = detail::make_timestamp(rng, key.year);
    table.records.push_back(std::move(r));
  }
  return table;
}

// One table per (dataset, year); a fixed config+seed regenerates the exact
// same database no matter the iteration or insertion order.
inline Database generate_universe(const UniverseConfig& config) {
  config.validate();
  Database db;
  for (const auto& dataset : config.datasets) {
    for (int year : config.years) {
      db.insert(generate_table(CacheKey::make(dataset, year), config));
    }
  }
  return db;
}

// --- simulated latency ------------------------------------------------------

struct LatencyModel {
  double main_memory_load = 1.0;  // seconds per load_db
  double cache_read_factor = 7.5; // cache reads are 5-10x faster; midpoint default
  std::map<std::string, double> per_tool_latency = {
      {"detect_objects", 1.3},
      {"classify_landcover", 1.1},
      {"answer_vqa", 1.2},
      {"plot_images", 0.8},
  };
  double llm_round_trip = 0.35;   // simulated completion latency (mock driver)
  double jitter_fraction = 0.0;   // relative uniform jitter on every sample
  std::uint64_t seed = 1234;

  void validate() const {
    if (main_memory_load <= 0.0) throw ConfigError("latency.main_memory_load: must be > 0");
    if (cache_read_factor < 5.0 || cache_read_factor > 10.0) {
      throw ConfigError("latency.cache_read_factor: must be within [5, 10]");
    }
    if (jitter_fraction < 0.0 || jitter_fraction >= 1.0) {
      throw ConfigError("latency.jitter_fraction: must be within [0, 1)");
    }
    if (llm_round_trip <= 0.0) throw ConfigError("latency.llm_round_trip: must be > 0");
    for (const auto& [tool, v] : per_tool_latency) {
      if (v <= 0.0) throw ConfigError("latency.per_tool_latency." + tool + ": must be > 0");
    }
  }

  double cache_read_nominal() const { return main_memory_load / cache_read_factor; }

  double sample(double nominal, Rng& rng) const {
    if (jitter_fraction == 0.0) return nominal;
    return nominal * (1.0 + next_uniform(rng, -jitter_fraction, jitter_fraction));
  }

  double sample_load(Rng& rng) const { return sample(main_memory_load, rng); }
  double sample_cache_read(Rng& rng) const { return sample(cache_read_nominal(), rng); }

  double sample_tool(const std::string& tool, Rng& rng) const {
    auto it = per_tool_latency.find(tool);
    return it == per_tool_latency.end() ? 0.0 : sample(it->second, rng);
  }

  json to_json() const {
    return {{"main_memory_load", main_memory_load},
            {"cache_read_factor", cache_read_factor},
            {"per_tool_latency", per_tool_latency},
            {"llm_round_trip", llm_round_trip},
            {"jitter_fraction", jitter_fraction},
            {"seed", seed}};
  }

  static LatencyModel from_json(const json& j) {
    LatencyModel m;
    if (j.contains("main_memory_load")) m.main_memory_load = j.at("main_memory_load").get<double>();
    if (j.contains("cache_read_factor")) m.cache_read_factor = j.at("cache_read_factor").get<double>();
    if (j.contains("per_tool_latency")) {
      m.per_tool_latency = j.at("per_tool_latency").get<std::map<std::string, double>>();
    }
    if (j.contains("llm_round_trip")) m.llm_round_trip = j.at("llm_round_trip").get<double>();
    if (j.contains("jitter_fraction")) m.jitter_fraction = j.at("jitter_fraction").get<double>();
    if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  }
};

// load_db as a plain operation: the table plus its simulated elapsed time.
// Missing keys throw; the tool layer turns that into a failed ToolResult.
inline std::pair<TablePtr, double> load_db(const Database& db, const CacheKey& key,
                                           const LatencyModel& model, Rng& rng) {
  TablePtr table = db.find(key);
  if (!table) throw Error("key not found: " + key.str());
  return {table, model.sample_load(rng)};
}

inline double read_cache_latency(const LatencyModel& model, Rng& rng) {
  return model.sample_cache_read(rng);
}

// --- serialization ----------------------------------------------------------
//
// Layout under a universe directory:
//   universe.json            config snapshot + per-table size_bytes
//   tables/<dataset>-<year>.jsonl   one ImageRecord per line

inline void save_universe(const Database& db, const UniverseConfig& config,
                          const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "tables");
  json manifest_tables = json::array();
  for (const auto& key : db.keys()) {
    TablePtr table = db.find(key);
    const fs::path file = dir / "tables" / (key.str() + ".jsonl");
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    for (const auto& r : table->records) {
      out << r.to_json().dump() << '\n';
    }
    manifest_tables.push_back({{"key", key.str()},
                               {"size_bytes", table->size_bytes},
                               {"records", table->records.size()}});
  }
  json manifest = {{"config", config.to_json()}, {"tables", manifest_tables}};
  std::ofstream out(dir / "universe.json");
  out << manifest.dump(2) << '\n';
}

inline Database load_universe(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = dir / "universe.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error("missing universe manifest: " + manifest_path.string());
  json manifest = json::parse(in);
  Database db;
  for (const auto& t : manifest.at("tables")) {
    MetadataTable table;
    table.key = CacheKey::parse(t.at("key").get<std::string>());
    table.size_bytes = t.at("size_bytes").get<std::uint64_t>();
    const fs::path file = dir / "tables" / (table.key.str() + ".jsonl");
    std::ifstream records(file);
    if (!records) throw Error("missing table file: " + file.string());
    std::string line;
    while (std::getline(records, line)) {
      if (trim(line).empty()) continue;
      table.records.push_back(ImageRecord::from_json(json::parse(line)));
    }
    db.insert(std::move(table));
  }
  return db;
}

}  // namespace toolcache
