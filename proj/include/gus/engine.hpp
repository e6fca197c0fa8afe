#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/artifacts.hpp"
#include "gus/embedding.hpp"
#include "gus/lsh.hpp"
#include "gus/point.hpp"
#include "gus/scorer.hpp"
#include "gus/sparse_index.hpp"

namespace gus::engine {

// Raised for lookups of ids the engine does not know (HTTP 404).
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NeighborEntry {
  std::string id;
  double index_dist;
  double similarity;

  bool operator==(const NeighborEntry&) const = default;
};

// Neighbors ordered by descending similarity, ties by ascending id.
// index_dist is kept for diagnostics.
struct Neighborhood {
  std::vector<NeighborEntry> neighbors;
  std::size_t k_requested = 0;
  std::optional<double> tau;
  double latency_us = 0.0;
};

struct NeighborsRequest {
  std::optional<std::string> id;  // exactly one of id / point
  std::optional<Point> point;
  std::optional<std::size_t> k;  // defaults to the engine's default_k
  std::optional<double> tau;     // when set, threshold search; explicit k then caps
};

// Sliding-window latency tracker: percentiles over the most recent samples
// plus a power-of-two histogram over everything seen.
class LatencyRecorder {
 public:
  void record(double us);
  nlohmann::json to_json() const;

 private:
  static constexpr std::size_t kWindow = 8192;

  mutable std::mutex mutex_;
  std::vector<double> window_;
  std::size_t next_ = 0;
  std::uint64_t count_ = 0;
  std::array<std::uint64_t, 32> histogram_{};  // bucket i: us < 2^i
};

struct EngineOptions {
  lsh::LshScheme scheme;
  std::size_t default_k = 10;
  std::optional<std::string> bundle_dir;   // idf/filter (+ model/snapshot)
  std::optional<std::string> corpus_path;  // features; embedding source when
                                           // the bundle has no snapshot
  std::optional<std::string> model_path;   // fallback when the bundle
                                           // carries no model
};

// Serving layer tying the bucketizer, embedding artifacts, index, feature
// store and similarity model together.
//
// Consistency: a single readers-writer lock covers the index, the feature
// store and the active artifacts, so each mutation is atomic with respect
// to queries and is visible to any query issued after its return.
//
// Artifact reloads swap the IDF table, filter set and (when the bundle
// carries one) the model for future operations only; embeddings already in
// the index are not recomputed. Re-embedding everything is an offline
// concern: rerun preprocess and restart (or reload) from the new bundle.
class Engine {
 public:
  explicit Engine(EngineOptions options);

  // Bucketize -> embed under the active artifacts -> index + feature
  // store. Returns whether the id already existed.
  bool upsert(Point p);

  // Returns whether the id existed.
  bool remove(const std::string& id);

  // By-id queries use the embedding stored in the index (so points
  // indexed under previous artifacts stay queryable as themselves);
  // by-point queries embed the supplied features under the active
  // artifacts. The query point itself is never part of the answer and is
  // never implicitly inserted.
  Neighborhood neighbors(const NeighborsRequest& request) const;

  // Atomically swaps in the bundle's artifacts. The bundle must have been
  // built under the same scheme. On any error the active artifacts are
  // left untouched.
  void reload(const std::string& bundle_dir);

  std::size_t size() const;
  bool contains(const std::string& id) const;
  nlohmann::json stats() const;

  const lsh::LshScheme& scheme() const { return bucketizer_.scheme(); }
  std::size_t default_k() const { return default_k_; }

 private:
  struct Loaded {
    emb::IdfTable idf;
    emb::FilterSet filter;
    std::optional<scorer::ModelWeights> model;
  };

  Loaded load_artifacts(const std::string& bundle_dir) const;

  lsh::Bucketizer bucketizer_;
  std::size_t default_k_;

  mutable std::shared_mutex mutex_;
  emb::IdfTable idf_;
  emb::FilterSet filter_;
  scorer::ModelWeights model_;
  idx::SparseIndex index_;
  std::unordered_map<std::string, Point> features_;

  mutable LatencyRecorder upsert_latency_;
  mutable LatencyRecorder remove_latency_;
  mutable LatencyRecorder neighbors_latency_;
};

}  // namespace gus::engine
