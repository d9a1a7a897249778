// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toolcache {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent configuration (bad field values, empty lists).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Cache preconditions: victim() on a cache that is not full.
class CacheError : public Error {
 public:
  using Error::Error;
};

// Tool registration conflicts.
class RegistryError : public Error {
 public:
  using Error::Error;
};

// Unresolved slot in a prompt template.
class TemplateError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure talking to a chat endpoint.
class EndpointError : public Error {
 public:
  using Error::Error;
};

// Endpoint answered, but the payload is not a valid chat completion.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Aggregation / reporting failures (missing runs, mismatched task sets).
class ReportError : public Error {
 public:
  using Error::Error;
};

// --- deterministic randomness helpers -------------------------------------
//
// All generation paths seed an explicit mt19937_64 and draw through the
// helpers below instead of std::uniform_*_distribution, so a fixed seed
// yields the same stream on every platform and compiler.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-stream seed derived from a run seed and a string tag (task id, cache
// key, ...). Keeps parallel workers reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ fnv1a64(tag));
}

using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t next_below(Rng& rng, std::uint64_t n) {
  return rng() % n;
}

// Uniform integer in [lo, hi] inclusive.
inline std::int64_t next_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(next_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Uniform double in [0, 1).
inline double next_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double next_uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * next_double(rng);
}

inline bool next_bernoulli(Rng& rng, double p) {
  return next_double(rng) < p;
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[next_below(rng, i)]);
  }
}

// --- small text helpers ----------------------------------------------------

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// ROUGE-L F-measure over word tokens (used by the free-text answer
// comparator). Two empty strings compare as identical.
inline double rouge_l(std::string_view candidate, std::string_view reference) {
  auto a = word_tokens(candidate);
  auto b = word_tokens(reference);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[b.size()]);
  const double p = lcs / static_cast<double>(a.size());
  const double r = lcs / static_cast<double>(b.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

}  // namespace toolcache
