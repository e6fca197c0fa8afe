#pragma once

// Shared fixtures and independent reference implementations ("oracles")
// for the test suites. The oracles here deliberately re-derive results
// with plain full scans and sorts instead of calling the code under test.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gus/embedding.hpp"
#include "gus/lsh.hpp"
#include "gus/point.hpp"
#include "gus/rng.hpp"

namespace testsupport {

// ---- fixtures ----------------------------------------------------------

// Three points whose bucket sets are {b1,b2,b4}, {b1,b3}, {b3} via direct
// token hashing; the expected candidate pairs are (p1,p2) and (p2,p3).
inline gus::lsh::LshScheme token_only_scheme() {
  gus::lsh::LshScheme scheme;
  scheme.seed = 0;
  scheme.token_fields.emplace("b", gus::lsh::TokenFieldScheme{true, 0});
  return scheme;
}

inline gus::Point token_point(std::string id, std::vector<std::string> tokens) {
  gus::Point p;
  p.id = std::move(id);
  p.tokens.emplace("b", std::move(tokens));
  return p;
}

inline std::vector<gus::Point> three_point_corpus() {
  return {token_point("p1", {"b1", "b2", "b4"}), token_point("p2", {"b1", "b3"}),
          token_point("p3", {"b3"})};
}

// Bucket id of a single token under token_only_scheme, derived through a
// singleton point so tests never hard-code hash values.
inline gus::lsh::BucketId token_bucket_id(const std::string& token) {
  const auto buckets =
      gus::lsh::bucketize(token_point("tmp", {token}), token_only_scheme());
  return *buckets.begin();
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto base = std::filesystem::temp_directory_path() /
              ("gus_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(base);
  return base;
}

struct TempDir {
  explicit TempDir(const std::string& tag) : path(make_temp_dir(tag)) {}
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }

  std::filesystem::path path;
};

// Random canonical embedding: dims drawn from [0, dim_pool), weights in
// (0.1, 4.1).
inline gus::emb::SparseEmbedding random_embedding(gus::rng::SplitMix64& gen,
                                                  std::uint64_t dim_pool,
                                                  std::size_t max_dims) {
  const std::size_t n = 1 + gen.bounded(max_dims);
  std::map<gus::lsh::BucketId, double> entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries[gen.bounded(dim_pool)] = 0.1 + 4.0 * gen.uniform01();
  }
  gus::emb::SparseEmbedding e;
  for (const auto& [d, w] : entries) {
    e.dims.push_back(d);
    e.weights.push_back(w);
  }
  return e;
}

// ---- oracles ------------------------------------------------------------

struct OracleHit {
  std::string id;
  double dist;
};

// Merge-join dot product written out independently of emb::dist.
inline double oracle_dist(const gus::emb::SparseEmbedding& a,
                          const gus::emb::SparseEmbedding& b) {
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.dims.size() && j < b.dims.size()) {
    if (a.dims[i] == b.dims[j]) {
      dot += a.weights[i] * b.weights[j];
      ++i;
      ++j;
    } else if (a.dims[i] < b.dims[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return -dot;
}

inline void oracle_sort(std::vector<OracleHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const OracleHit& x, const OracleHit& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    return x.id < y.id;
  });
}

// Full scan: all points with dist < 0, sorted by (dist, id), first k.
inline std::vector<OracleHit> oracle_topk(
    const std::map<std::string, gus::emb::SparseEmbedding>& points,
    const gus::emb::SparseEmbedding& q, std::size_t k, const std::string* exclude) {
  std::vector<OracleHit> hits;
  for (const auto& [id, e] : points) {
    if (exclude && id == *exclude) continue;
    const double d = oracle_dist(q, e);
    if (d < 0.0) hits.push_back({id, d});
  }
  oracle_sort(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

// Full scan: the literal {p : dist <= tau} set.
inline std::vector<OracleHit> oracle_threshold(
    const std::map<std::string, gus::emb::SparseEmbedding>& points,
    const gus::emb::SparseEmbedding& q, double tau, const std::string* exclude) {
  std::vector<OracleHit> hits;
  for (const auto& [id, e] : points) {
    if (exclude && id == *exclude) continue;
    const double d = oracle_dist(q, e);
    if (d <= tau) hits.push_back({id, d});
  }
  oracle_sort(hits);
  return hits;
}

// Sort-based IDF reference: all ln(total/count) floored, sorted by
// (weight desc, bucket asc), top size_limit kept.
struct OracleIdf {
  std::vector<std::pair<gus::lsh::BucketId, double>> stored;  // sorted by bucket
  double clamp;
};

inline OracleIdf oracle_idf(const std::unordered_map<gus::lsh::BucketId, std::uint64_t>& stats,
                            std::uint64_t total, std::size_t size_limit) {
  std::vector<std::pair<double, gus::lsh::BucketId>> all;
  for (const auto& [b, c] : stats) {
    double w = std::log(static_cast<double>(total) / static_cast<double>(c));
    if (w < 1e-6) w = 1e-6;
    all.push_back({w, b});
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  if (all.size() > size_limit) all.resize(size_limit);
  OracleIdf out;
  out.clamp = all.empty() ? 1e-6 : all.back().first;
  for (const auto& [w, b] : all) out.stored.push_back({b, w});
  std::sort(out.stored.begin(), out.stored.end());
  return out;
}

// Count-sort filter reference: top ceil(percent/100 * n) by (count desc,
// bucket asc).
inline std::set<gus::lsh::BucketId> oracle_filter(
    const std::unordered_map<gus::lsh::BucketId, std::uint64_t>& stats, double percent) {
  std::vector<std::pair<std::uint64_t, gus::lsh::BucketId>> all;
  for (const auto& [b, c] : stats) all.push_back({c, b});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  const auto take = static_cast<std::size_t>(
      std::ceil(percent / 100.0 * static_cast<double>(all.size())));
  std::set<gus::lsh::BucketId> out;
  for (std::size_t i = 0; i < take && i < all.size(); ++i) out.insert(all[i].second);
  return out;
}

}  // namespace testsupport
