#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "gus/embedding.hpp"

namespace gus::idx {

using emb::SparseEmbedding;
using lsh::BucketId;

struct Hit {
  std::string id;
  double dist;

  bool operator==(const Hit&) const = default;
};

// Dynamic exact maximum-inner-product index over sparse embeddings,
// realized as an inverted index: one posting list per dimension. Queries
// accumulate scores over the query's posting lists in ascending dimension
// order, which makes every returned distance bitwise equal to the
// merge-join dot product a full scan would compute.
//
// Results are sorted ascending by (dist, id); all weights are strictly
// positive, so an accumulated candidate always has dist < 0 and points
// sharing no dimension with the query are never accumulated. Top-k
// therefore never returns zero-overlap strangers. Threshold queries honor
// the literal contract {p : dist <= tau}: a tau >= 0 also returns the
// non-overlapping points, at dist exactly 0.
//
// Thread contract: operations are atomic and linearizable; any number of
// concurrent readers or one writer (internal shared_mutex).
class SparseIndex {
 public:
  SparseIndex() = default;

  // Replaces any previous embedding of id (stale postings removed).
  // Returns whether the id already existed. The embedding may be empty;
  // the id is still registered. Throws on non-canonical embeddings.
  bool upsert(const std::string& id, SparseEmbedding embedding);

  // Returns whether the id existed. Posting lists that become empty are
  // erased.
  bool remove(const std::string& id);

  // Drops every point and posting list.
  void clear();

  // Exact k smallest distances (k >= 1), excluding exclude_id when given.
  std::vector<Hit> query_topk(const SparseEmbedding& query, std::size_t k,
                              const std::string* exclude_id = nullptr) const;

  // Exactly the points with dist <= tau, same order and exclusion rules.
  std::vector<Hit> query_threshold(const SparseEmbedding& query, double tau,
                                   const std::string* exclude_id = nullptr) const;

  std::size_t size() const;
  bool contains(const std::string& id) const;
  std::optional<SparseEmbedding> embedding_of(const std::string& id) const;

  // Number of dimensions with a non-empty posting list.
  std::size_t dimension_count() const;
  // Total postings across all lists.
  std::size_t posting_count() const;
  // All indexed ids in ascending order.
  std::vector<std::string> ids_sorted() const;

  // Snapshot file: JSON {"format": "gus-index-snapshot-v1",
  // "points": [{"id": ..., "embedding": [[dim, weight], ...]}, ...]},
  // points ascending by id. load() replaces the current contents.
  void save_snapshot(const std::string& path) const;
  void load_snapshot(const std::string& path);

 private:
  struct Posting {
    std::uint32_t slot;
    double weight;
  };

  static constexpr std::uint32_t kFreeSlot = 0xFFFFFFFFu;

  bool upsert_locked(const std::string& id, SparseEmbedding embedding);
  void remove_postings_locked(std::uint32_t slot, const SparseEmbedding& embedding);
  void insert_postings_locked(std::uint32_t slot, const SparseEmbedding& embedding);
  std::vector<Hit> collect_locked(const SparseEmbedding& query, double tau,
                                  bool include_zero,
                                  const std::string* exclude_id) const;

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::uint32_t> id_to_slot_;
  std::vector<std::string> slot_to_id_;
  std::vector<SparseEmbedding> embeddings_;  // by slot
  std::vector<std::uint32_t> free_slots_;
  std::unordered_map<BucketId, std::vector<Posting>> postings_;
};

}  // namespace gus::idx
