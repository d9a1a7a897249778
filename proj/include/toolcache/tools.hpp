// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolcache/cache.hpp"
#include "toolcache/common.hpp"
#include "toolcache/data.hpp"

namespace toolcache {

struct ToolCall {
  std::string id;  // wire correlation id
  std::string name;
  json arguments = json::object();
};

struct ToolResult {
  enum class Status { Ok, Failed };
  Status status = Status::Ok;
  json payload = json::object();
  std::string message;  // non-empty for failures; this is what the agent reads
  double elapsed = 0.0;

  bool ok() const { return status == Status::Ok; }

  static ToolResult success(json payload, double elapsed) {
    return {Status::Ok, std::move(payload), "", elapsed};
  }
  static ToolResult failure(std::string message, double elapsed = 0.0) {
    return {Status::Failed, json::object(), std::move(message), elapsed};
  }

  json to_json() const {
    return {{"status", ok() ? "ok" : "failed"},
            {"payload", payload},
            {"message", message},
            {"elapsed", elapsed}};
  }
};

struct ToolSpec {
  struct Param {
    std::string name;
    std::string type;  // "string" | "array" (of strings) | "integer" | "number"
    std::string description;
    bool required = true;
  };

  std::string name;
  std::string description;
  std::vector<Param> params;

  // Chat-completions "tools" entry layout, bit for bit.
  json to_wire() const {
    json properties = json::object();
    json required = json::array();
    for (const auto& p : params) {
      json prop = {{"type", p.type == "array" ? "array" : p.type},
                   {"description", p.description}};
      if (p.type == "array") prop["items"] = {{"type", "string"}};
      properties[p.name] = prop;
      if (p.required) required.push_back(p.name);
    }
    return {{"type", "function"},
            {"function",
             {{"name", name},
              {"description", description},
              {"parameters",
               {{"type", "object"}, {"properties", properties}, {"required", required}}}}}};
  }

  // Declared-shape check; failures become failed ToolResults upstream.
  std::optional<std::string> validate_args(const json& args) const {
    if (!args.is_object()) return "arguments must be a JSON object";
    for (const auto& p : params) {
      if (!args.contains(p.name)) {
        if (p.required) return "missing required argument '" + p.name + "'";
        continue;
      }
      const json& v = args.at(p.name);
      if (p.type == "string" && !v.is_string()) return "argument '" + p.name + "' must be a string";
      if (p.type == "integer" && !v.is_number_integer())
        return "argument '" + p.name + "' must be an integer";
      if (p.type == "number" && !v.is_number()) return "argument '" + p.name + "' must be a number";
      if (p.type == "array") {
        if (!v.is_array()) return "argument '" + p.name + "' must be an array";
        for (const auto& e : v) {
          if (!e.is_string()) return "argument '" + p.name + "' must be an array of strings";
        }
      }
    }
    for (auto it = args.begin(); it != args.end(); ++it) {
      bool declared = false;
      for (const auto& p : params) {
        if (p.name == it.key()) declared = true;
      }
      if (!declared) return "unknown argument '" + it.key() + "'";
    }
    return std::nullopt;
  }
};

using MetadataCache = Cache<TablePtr>;

// Per-episode mutable state handed to tool executors. The database and
// registry are shared and immutable; cache and rng belong to this episode's
// executor.
struct EpisodeContext {
  const Database* db = nullptr;
  MetadataCache* cache = nullptr;  // null when the cache arm is disabled
  const LatencyModel* latency = nullptr;
  Rng rng{0};
  // Tables brought into context this episode via load_db or read_cache.
  std::map<CacheKey, TablePtr> loaded;

  bool has_loaded(const CacheKey& key) const { return loaded.count(key) > 0; }
};

using ToolFn = std::function<ToolResult(const json& args, EpisodeContext& ctx)>;

class Registry {
 public:
  void add(ToolSpec spec, ToolFn fn) {
    const std::string name = spec.name;
    if (tools_.count(name)) throw RegistryError("duplicate tool: " + name);
    order_.push_back(name);
    Tool tool{std::move(spec), std::move(fn)};
    tools_.emplace(name, std::move(tool));
  }

  bool has(const std::string& name) const { return tools_.count(name) > 0; }

  const ToolSpec& spec(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw RegistryError("unknown tool: " + name);
    return it->second.spec;
  }

  std::vector<ToolSpec> specs() const {
    std::vector<ToolSpec> out;
    for (const auto& name : order_) out.push_back(tools_.at(name).spec);
    return out;
  }

  json wire_tools() const {
    json out = json::array();
    for (const auto& name : order_) out.push_back(tools_.at(name).spec.to_wire());
    return out;
  }

  ToolResult execute(const ToolCall& call, EpisodeContext& ctx) const {
    auto it = tools_.find(call.name);
    if (it == tools_.end()) {
      return ToolResult::failure("unknown tool: " + call.name);
    }
    if (auto err = it->second.spec.validate_args(call.arguments)) {
      return ToolResult::failure("invalid arguments for " + call.name + ": " + *err);
    }
    try {
      return it->second.fn(call.arguments, ctx);
    } catch (const std::exception& e) {
      return ToolResult::failure(std::string("tool ") + call.name + " failed: " + e.what());
    }
  }

 private:
  struct Tool {
    ToolSpec spec;
    ToolFn fn;
  };
  std::map<std::string, Tool> tools_;
  std::vector<std::string> order_;
};

namespace detail {

inline std::vector<CacheKey> parse_keys_arg(const json& args) {
  std::vector<CacheKey> keys;
  for (const auto& k : args.at("keys")) {
    keys.push_back(CacheKey::parse(k.get<std::string>()));
  }
  if (keys.empty()) throw Error("'keys' must not be empty");
  return keys;
}

// Analytics tools operate on tables previously brought into context; a key
// that was never loaded or cache-read fails the call so the agent re-plans.
inline std::optional<ToolResult> require_loaded(const std::vector<CacheKey>& keys,
                                                const EpisodeContext& ctx) {
  for (const auto& k : keys) {
    if (!ctx.has_loaded(k)) {
      return ToolResult::failure("data not loaded: " + k.str());
    }
  }
  return std::nullopt;
}

inline std::string join_keys(const std::vector<CacheKey>& keys) {
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ", ";
    out += keys[i].str();
  }
  return out;
}

}  // namespace detail

// --- deterministic answer computations --------------------------------------
//
// Shared by the live tools and the workload model checker, so ground-truth
// answers are recomputable from the database alone.

inline std::uint64_t count_detections(const std::vector<TablePtr>& tables,
                                      const std::string& object_class) {
  std::uint64_t total = 0;
  for (const auto& t : tables) {
    for (const auto& r : t->records) {
      for (const auto& d : r.detections) {
        if (d.class_label == object_class) total += d.count;
      }
    }
  }
  return total;
}

inline std::string dominant_landcover(const std::vector<TablePtr>& tables) {
  std::map<std::string, std::size_t> votes;
  for (const auto& t : tables) {
    for (const auto& r : t->records) votes[landcover_label(r)] += 1;
  }
  std::string best;
  std::size_t best_votes = 0;
  for (const auto& [label, n] : votes) {  // ties resolve lexicographically
    if (n > best_votes) {
      best = label;
      best_votes = n;
    }
  }
  return best;
}

inline std::string most_common_class(const std::vector<TablePtr>& tables) {
  std::map<std::string, std::uint64_t> totals;
  for (const auto& t : tables) {
    for (const auto& r : t->records) {
      for (const auto& d : r.detections) totals[d.class_label] += d.count;
    }
  }
  std::string best;
  std::uint64_t best_total = 0;
  for (const auto& [label, n] : totals) {
    if (n > best_total) {
      best = label;
      best_total = n;
    }
  }
  return best;
}

inline std::size_t count_images(const std::vector<TablePtr>& tables) {
  std::size_t n = 0;
  for (const auto& t : tables) n += t->records.size();
  return n;
}

// Canonical free-text answers for the VQA mock.
inline std::string vqa_answer(const std::vector<CacheKey>& keys,
                              const std::vector<TablePtr>& tables, const std::string& question) {
  const std::string joined = detail::join_keys(keys);
  const std::string q = to_lower(question);
  if (q.find("how many") != std::string::npos) {
    for (const auto& cls : object_classes()) {
      if (q.find(cls) != std::string::npos) {
        return "There are " + std::to_string(count_detections(tables, cls)) + " " + cls +
               " detections across " + joined + ".";
      }
    }
    return "There are " + std::to_string(count_images(tables)) + " images across " + joined + ".";
  }
  if (q.find("most often") != std::string::npos || q.find("most common") != std::string::npos) {
    return "The most common object class in " + joined + " is " + most_common_class(tables) + ".";
  }
  return "Unable to answer from the available metadata for " + joined + ".";
}

// --- default registry --------------------------------------------------------
//
// Data access (load_db / read_cache) plus deterministic analytics mocks that
// compute exact answers from the generated ground truth. load_db never
// touches the cache: insertion is the update policy's job, not the load's.

inline Registry registry_default() {
  Registry reg;

  reg.add(
      {"load_db",
       "Load the metadata table for one dataset-year key from the main database (slow path).",
       {{"key", "string", "Cache key formatted as <dataset>-<year>, e.g. xview1-2022", true}}},
      [](const json& args, EpisodeContext& ctx) {
        const CacheKey key = CacheKey::parse(args.at("key").get<std::string>());
        if (!ctx.db->contains(key)) {
          return ToolResult::failure("key not found: " + key.str(),
                                     ctx.latency->sample_load(ctx.rng));
        }
        auto [table, elapsed] = load_db(*ctx.db, key, *ctx.latency, ctx.rng);
        ctx.loaded[key] = table;
        return ToolResult::success(
            {{"key", key.str()}, {"records", table->records.size()}, {"size_bytes", table->size_bytes}},
            elapsed);
      });

  reg.add(
      {"read_cache",
       "Read the metadata table for one dataset-year key from the local cache (fast path). "
       "Fails on a cache miss.",
       {{"key", "string", "Cache key formatted as <dataset>-<year>", true}}},
      [](const json& args, EpisodeContext& ctx) {
        const CacheKey key = CacheKey::parse(args.at("key").get<std::string>());
        const double elapsed = ctx.latency->sample_cache_read(ctx.rng);
        if (ctx.cache == nullptr) {
          return ToolResult::failure("cache disabled", elapsed);
        }
        auto value = ctx.cache->get(key);
        if (!value) {
          return ToolResult::failure("cache miss: " + key.str(), elapsed);
        }
        ctx.loaded[key] = *value;
        return ToolResult::success(
            {{"key", key.str()}, {"records", (*value)->records.size()}, {"source", "cache"}},
            elapsed);
      });

  reg.add(
      {"detect_objects",
       "Count detections of one object class across previously loaded dataset-year keys.",
       {{"keys", "array", "Dataset-year keys to scan", true},
        {"object_class", "string", "Object class label, e.g. airplane", true}}},
      [](const json& args, EpisodeContext& ctx) {
        auto keys = detail::parse_keys_arg(args);
        if (auto fail = detail::require_loaded(keys, ctx)) return *fail;
        std::vector<TablePtr> tables;
        for (const auto& k : keys) tables.push_back(ctx.loaded.at(k));
        const std::string cls = args.at("object_class").get<std::string>();
        const auto count = count_detections(tables, cls);
        return ToolResult::success({{"object_class", cls}, {"count", count}},
                                   ctx.latency->sample_tool("detect_objects", ctx.rng));
      });

  reg.add({"classify_landcover",
           "Report the dominant land-cover label across previously loaded dataset-year keys.",
           {{"keys", "array", "Dataset-year keys to classify", true}}},
          [](const json& args, EpisodeContext& ctx) {
            auto keys = detail::parse_keys_arg(args);
            if (auto fail = detail::require_loaded(keys, ctx)) return *fail;
            std::vector<TablePtr> tables;
            for (const auto& k : keys) tables.push_back(ctx.loaded.at(k));
            return ToolResult::success({{"label", dominant_landcover(tables)}},
                                       ctx.latency->sample_tool("classify_landcover", ctx.rng));
          });

  reg.add({"answer_vqa",
           "Answer a free-text question about previously loaded dataset-year keys.",
           {{"keys", "array", "Dataset-year keys the question refers to", true},
            {"question", "string", "The question text", true}}},
          [](const json& args, EpisodeContext& ctx) {
            auto keys = detail::parse_keys_arg(args);
            if (auto fail = detail::require_loaded(keys, ctx)) return *fail;
            std::vector<TablePtr> tables;
            for (const auto& k : keys) tables.push_back(ctx.loaded.at(k));
            return ToolResult::success(
                {{"answer", vqa_answer(keys, tables, args.at("question").get<std::string>())}},
                ctx.latency->sample_tool("answer_vqa", ctx.rng));
          });

  reg.add({"plot_images",
           "Plot the images of previously loaded dataset-year keys on the map view.",
           {{"keys", "array", "Dataset-year keys to plot", true}}},
          [](const json& args, EpisodeContext& ctx) {
            auto keys = detail::parse_keys_arg(args);
            if (auto fail = detail::require_loaded(keys, ctx)) return *fail;
            std::vector<TablePtr> tables;
            for (const auto& k : keys) tables.push_back(ctx.loaded.at(k));
            return ToolResult::success(
                {{"plotted", count_images(tables)}, {"keys", detail::join_keys(keys)}},
                ctx.latency->sample_tool("plot_images", ctx.rng));
          });

  return reg;
}

inline bool is_data_access_tool(const std::string& name) {
  return name == "load_db" || name == "read_cache";
}

}  // namespace toolcache
