// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toolcache/common.hpp"

namespace toolcache {

using json = nlohmann::ordered_json;

// Cache keys follow the template "<dataset>-<year>": lowercase dataset name,
// 4-digit year. Parsing splits at the final "-<4 digits>" suffix, so dataset
// names themselves may contain dashes but must not end in one such suffix.
struct CacheKey {
  std::string dataset;
  int year = 0;

  auto operator<=>(const CacheKey&) const = default;

  std::string str() const { return dataset + "-" + year_digits(); }

  static bool valid_dataset(std::string_view name) {
    if (name.empty()) return false;
    for (unsigned char c : name) {
      if (!(std::islower(c) || std::isdigit(c) || c == '_' || c == '-')) return false;
    }
    // Reject names whose tail already looks like a year suffix.
    if (name.size() >= 5 && name[name.size() - 5] == '-') {
      bool digits = true;
      for (std::size_t i = name.size() - 4; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      }
      if (digits) return false;
    }
    return true;
  }

  static CacheKey make(std::string_view dataset, int year) {
    std::string ds = to_lower(dataset);
    if (!valid_dataset(ds)) throw ConfigError("invalid dataset name: '" + std::string(dataset) + "'");
    if (year < 1000 || year > 9999) throw ConfigError("year must have 4 digits: " + std::to_string(year));
    return CacheKey{std::move(ds), year};
  }

  static CacheKey parse(std::string_view text) {
    if (text.size() < 6 || text[text.size() - 5] != '-') {
      throw ConfigError("cache key must match <dataset>-<year>: '" + std::string(text) + "'");
    }
    for (std::size_t i = text.size() - 4; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
        throw ConfigError("cache key must end in a 4-digit year: '" + std::string(text) + "'");
      }
    }
    int year = std::stoi(std::string(text.substr(text.size() - 4)));
    return make(text.substr(0, text.size() - 5), year);
  }

 private:
  std::string year_digits() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d", year);
    return buf;
  }
};

enum class PolicyKind { LRU, LFU, RR, FIFO };

inline std::string_view policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::LRU: return "LRU";
    case PolicyKind::LFU: return "LFU";
    case PolicyKind::RR: return "RR";
    case PolicyKind::FIFO: return "FIFO";
  }
  return "LRU";
}

inline PolicyKind parse_policy(std::string_view name) {
  std::string n = to_lower(name);
  if (n == "lru") return PolicyKind::LRU;
  if (n == "lfu") return PolicyKind::LFU;
  if (n == "rr") return PolicyKind::RR;
  if (n == "fifo") return PolicyKind::FIFO;
  throw ConfigError("unknown eviction policy: '" + std::string(name) + "'");
}

struct EvictionPolicy {
  PolicyKind kind = PolicyKind::LRU;
  std::uint64_t seed = 0;  // consumed by RR only

  static EvictionPolicy lru() { return {PolicyKind::LRU, 0}; }
  static EvictionPolicy lfu() { return {PolicyKind::LFU, 0}; }
  static EvictionPolicy fifo() { return {PolicyKind::FIFO, 0}; }
  static EvictionPolicy rr(std::uint64_t seed) { return {PolicyKind::RR, seed}; }
};

// Key-level view of the cache, embedded verbatim in prompts and trace logs.
// Keys are ordered by descending last access (most recent first).
struct CacheDescriptor {
  struct KeyInfo {
    std::string key;
    std::uint64_t size_bytes = 0;
    std::uint64_t access_count = 0;
  };
  std::size_t capacity = 0;
  std::string policy;
  std::vector<KeyInfo> keys;

  bool contains(const CacheKey& k) const {
    const std::string s = k.str();
    for (const auto& info : keys) {
      if (info.key == s) return true;
    }
    return false;
  }

  json to_json() const {
    json keys_json = json::array();
    for (const auto& info : keys) {
      keys_json.push_back({{"key", info.key},
                           {"size_bytes", info.size_bytes},
                           {"access_count", info.access_count}});
    }
    return {{"capacity", capacity}, {"policy", policy}, {"keys", keys_json}};
  }

  static CacheDescriptor from_json(const json& j) {
    CacheDescriptor d;
    d.capacity = j.at("capacity").get<std::size_t>();
    d.policy = j.at("policy").get<std::string>();
    for (const auto& e : j.at("keys")) {
      d.keys.push_back({e.at("key").get<std::string>(),
                        e.at("size_bytes").get<std::uint64_t>(),
                        e.at("access_count").get<std::uint64_t>()});
    }
    return d;
  }
};

// Capacity-bounded key-value cache with pluggable eviction. Value payloads
// are opaque; per-entry bookkeeping drives the four policies.
//
// Ownership: one episode executor mutates a given instance at a time.
template <typename Value>
class Cache {
 public:
  struct Entry {
    CacheKey key;
    Value value;
    std::uint64_t size_bytes = 0;
    std::uint64_t inserted_seq = 0;
    std::uint64_t last_access_seq = 0;
    std::uint64_t access_count = 0;
  };

  explicit Cache(std::size_t capacity = 5, EvictionPolicy policy = EvictionPolicy::lru(),
                 bool reads_refresh_recency = true)
      : capacity_(capacity),
        policy_(policy),
        reads_refresh_recency_(reads_refresh_recency),
        rr_engine_(policy.seed) {
    if (capacity_ == 0) throw ConfigError("cache capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() >= capacity_; }
  const EvictionPolicy& policy() const { return policy_; }
  std::uint64_t clock() const { return clock_; }

  bool contains(const CacheKey& key) const { return entries_.count(key) > 0; }

  // Hit: bumps access_count and (unless reads were configured not to touch
  // recency) stamps a fresh clock tick. Miss: returns nullopt, no mutation.
  std::optional<Value> get(const CacheKey& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.access_count += 1;
    if (reads_refresh_recency_) it->second.last_access_seq = ++clock_;
    return it->second.value;
  }

  // Inserts or replaces. Returns the evicted key when a full cache had to
  // make room for a new key; re-putting a present key only refreshes it.
  std::optional<CacheKey> put(const CacheKey& key, Value value, std::uint64_t size_bytes) {
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      it->second.value = std::move(value);
      it->second.size_bytes = size_bytes;
      it->second.access_count += 1;
      it->second.last_access_seq = ++clock_;
      return std::nullopt;
    }
    std::optional<CacheKey> evicted;
    if (full()) {
      evicted = victim();
      entries_.erase(*evicted);
      if (policy_.kind == PolicyKind::RR) rr_engine_();  // consume the peeked draw
    }
    const std::uint64_t tick = ++clock_;
    entries_.emplace(key, Entry{key, std::move(value), size_bytes, tick, tick, 1});
    return evicted;
  }

  // The key put() would evict right now. Pure; requires a full cache.
  CacheKey victim() const {
    if (!full()) throw CacheError("victim(): cache is not full");
    switch (policy_.kind) {
      case PolicyKind::LRU:
        return min_by([](const Entry& e) { return e.last_access_seq; });
      case PolicyKind::FIFO:
        return min_by([](const Entry& e) { return e.inserted_seq; });
      case PolicyKind::LFU: {
        // Least frequent; ties broken toward least recently used.
        const Entry* best = nullptr;
        for (const auto& [k, e] : entries_) {
          if (!best || e.access_count < best->access_count ||
              (e.access_count == best->access_count && e.last_access_seq < best->last_access_seq)) {
            best = &e;
          }
        }
        return best->key;
      }
      case PolicyKind::RR: {
        // Peek the next draw without advancing the engine; put() consumes it
        // on an actual eviction, so repeated calls agree.
        auto keys = sorted_keys();
        Rng peek = rr_engine_;
        return keys[peek() % keys.size()];
      }
    }
    throw CacheError("victim(): unreachable");
  }

  void erase(const CacheKey& key) { entries_.erase(key); }

  const Entry* find(const CacheKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  CacheDescriptor snapshot() const {
    CacheDescriptor d;
    d.capacity = capacity_;
    d.policy = std::string(policy_name(policy_.kind));
    std::vector<const Entry*> ordered;
    ordered.reserve(entries_.size());
    for (const auto& [k, e] : entries_) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(), [](const Entry* a, const Entry* b) {
      return a->last_access_seq > b->last_access_seq;
    });
    for (const Entry* e : ordered) {
      d.keys.push_back({e->key.str(), e->size_bytes, e->access_count});
    }
    return d;
  }

  std::vector<CacheKey> sorted_keys() const {
    std::vector<CacheKey> keys;
    keys.reserve(entries_.size());
    for (const auto& [k, e] : entries_) keys.push_back(k);
    return keys;  // std::map keeps canonical order
  }

 private:
  template <typename Fn>
  CacheKey min_by(Fn&& metric) const {
    const Entry* best = nullptr;
    for (const auto& [k, e] : entries_) {
      if (!best || metric(e) < metric(*best)) best = &e;
    }
    return best->key;
  }

  std::size_t capacity_;
  EvictionPolicy policy_;
  bool reads_refresh_recency_;
  std::map<CacheKey, Entry> entries_;
  std::uint64_t clock_ = 0;
  Rng rr_engine_;
};

}  // namespace toolcache
