#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/lsh.hpp"

namespace gus::emb {

using lsh::BucketId;

// Weights of buckets present in every point would be ln(1) = 0; they are
// floored here so every embedding entry stays strictly positive (negative
// distance must remain equivalent to "shares a dimension").
inline constexpr double kWeightFloor = 1e-6;

// Sparse vector in canonical form: dimensions strictly increasing, every
// weight > 0. Stored as parallel arrays.
struct SparseEmbedding {
  std::vector<BucketId> dims;
  std::vector<double> weights;

  std::size_t size() const { return dims.size(); }
  bool empty() const { return dims.empty(); }
  bool operator==(const SparseEmbedding&) const = default;

  // Sorts, validates positivity and rejects duplicate dimensions.
  static SparseEmbedding from_pairs(std::vector<std::pair<BucketId, double>> entries);
  bool is_canonical() const;
  // Squared L2 norm (the self dot product).
  double norm_squared() const;
};

// Negative dot product over shared dimensions; always <= 0, and < 0 exactly
// when the two embeddings share a dimension. Ascending-dimension merge with
// a single accumulator; the index accumulates query scores in the same
// order, so the two paths agree bitwise.
double dist(const SparseEmbedding& a, const SparseEmbedding& b);

// IDF weights for the `size_limit` buckets with the highest IDF; every
// other bucket reads as clamp_weight (the smallest stored weight). Note the
// clamp direction: buckets outside the table have *lower* true IDF than any
// stored bucket, so the clamp raises them to the table's smallest stored
// weight. size_limit == 0 disables the table entirely (unit weights).
struct IdfTable {
  std::uint64_t total_points = 0;
  std::size_t size_limit = 0;
  double clamp_weight = kWeightFloor;
  std::unordered_map<BucketId, double> stored;

  bool enabled() const { return size_limit > 0; }
};

// Stored weight if present, else the clamp. Table must be enabled.
double idf_lookup(BucketId b, const IdfTable& idf);

// idf(b) = ln(total / count(b)), floored at kWeightFloor. Keeps the
// size_limit largest weights (ties by ascending bucket ID); the clamp is
// the smallest kept weight, or the floor when nothing is stored.
IdfTable build_idf_table(const std::unordered_map<BucketId, std::uint64_t>& stats,
                         std::uint64_t total, std::size_t size_limit);

// The ceil(percent/100 * #buckets) buckets with the largest counts,
// boundary ties by ascending bucket ID.
struct FilterSet {
  double percent = 0.0;
  std::unordered_set<BucketId> excluded;

  bool contains(BucketId b) const { return excluded.count(b) > 0; }
};

FilterSet build_filter_set(const std::unordered_map<BucketId, std::uint64_t>& stats,
                           double percent);

// buckets \ filter, weighted 1.0 (IDF disabled) or by idf_lookup.
SparseEmbedding embed(const std::set<BucketId>& buckets, const IdfTable& idf,
                      const FilterSet& filter);

nlohmann::json idf_to_json(const IdfTable& idf);
IdfTable idf_from_json(const nlohmann::json& j, std::size_t size_limit);
nlohmann::json filter_to_json(const FilterSet& filter);
FilterSet filter_from_json(const nlohmann::json& j);

}  // namespace gus::emb
