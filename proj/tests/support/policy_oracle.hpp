// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference for the eviction policies. Keeps an append-only
// event log and, whenever an eviction is needed, rescans the full history
// to recompute recency / frequency / insertion order from first principles.
// Deliberately shares no code with toolcache::Cache.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toolcache/cache.hpp"

namespace toolcache::testing {

struct TraceOp {
  enum Kind { Get, Put } kind;
  CacheKey key;
};

class PolicyOracle {
 public:
  PolicyOracle(std::size_t capacity, EvictionPolicy policy)
      : capacity_(capacity), policy_(policy), rr_engine_(policy.seed) {}

  // Returns the key evicted by this op, if any.
  std::optional<CacheKey> apply(const TraceOp& op) {
    if (op.kind == TraceOp::Get) {
      if (resident_.count(op.key)) log_.push_back({++seq_, op.key, Event::Access});
      return std::nullopt;
    }
    if (resident_.count(op.key)) {
      log_.push_back({++seq_, op.key, Event::Access});
      return std::nullopt;
    }
    std::optional<CacheKey> evicted;
    if (resident_.size() >= capacity_) {
      evicted = select_victim();
      resident_.erase(*evicted);
    }
    resident_.insert(op.key);
    log_.push_back({++seq_, op.key, Event::Insert});
    return evicted;
  }

  std::set<CacheKey> resident() const { return resident_; }

 private:
  struct Event {
    std::uint64_t seq;
    CacheKey key;
    enum Kind { Insert, Access } kind;
  };

  struct History {
    std::uint64_t inserted = 0;
    std::uint64_t last_access = 0;
    std::uint64_t count = 0;
  };

  // Full-history scan: latest insertion, latest touch, touches since the
  // latest insertion (the insertion itself counts as the first access).
  History recompute(const CacheKey& key) const {
    History h;
    for (const auto& e : log_) {
      if (e.key != key) continue;
      if (e.kind == Event::Insert) {
        h.inserted = e.seq;
        h.last_access = e.seq;
        h.count = 1;
      } else {
        h.last_access = e.seq;
        h.count += 1;
      }
    }
    return h;
  }

  CacheKey select_victim() {
    std::vector<CacheKey> keys(resident_.begin(), resident_.end());  // canonical order
    if (policy_.kind == PolicyKind::RR) {
      return keys[rr_engine_() % keys.size()];
    }
    CacheKey best = keys.front();
    History bh = recompute(best);
    for (std::size_t i = 1; i < keys.size(); ++i) {
      History h = recompute(keys[i]);
      bool better = false;
      switch (policy_.kind) {
        case PolicyKind::LRU:
          better = h.last_access < bh.last_access;
          break;
        case PolicyKind::FIFO:
          better = h.inserted < bh.inserted;
          break;
        case PolicyKind::LFU:
          better = h.count < bh.count || (h.count == bh.count && h.last_access < bh.last_access);
          break;
        case PolicyKind::RR:
          break;
      }
      if (better) {
        best = keys[i];
        bh = h;
      }
    }
    return best;
  }

  std::size_t capacity_;
  EvictionPolicy policy_;
  Rng rr_engine_;
  std::set<CacheKey> resident_;
  std::vector<Event> log_;
  std::uint64_t seq_ = 0;
};

// Deterministic random trace over a small key universe.
inline std::vector<TraceOp> random_trace(std::uint64_t seed, std::size_t max_ops,
                                         std::size_t universe_size) {
  Rng rng(seed);
  std::vector<CacheKey> universe;
  for (std::size_t i = 0; i < universe_size; ++i) {
    universe.push_back(CacheKey::make("ds" + std::to_string(i), 2000 + static_cast<int>(i)));
  }
  const std::size_t n = 1 + next_below(rng, max_ops);
  std::vector<TraceOp> ops;
  ops.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    TraceOp op;
    op.kind = next_bernoulli(rng, 0.5) ? TraceOp::Get : TraceOp::Put;
    op.key = universe[next_below(rng, universe.size())];
    ops.push_back(op);
  }
  return ops;
}

}  // namespace toolcache::testing
