#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gus/lsh.hpp"
#include "gus/point.hpp"
#include "gus/scorer.hpp"

namespace gus::baseline {

// Unordered pair in canonical (first < second) form; never a self pair.
using ScoringPair = std::pair<std::string, std::string>;

struct WeightedEdge {
  std::string a;
  std::string b;
  double weight;

  bool operator==(const WeightedEdge&) const = default;
};

ScoringPair make_pair_canonical(std::string x, std::string y);

// Batch bucket-pair enumeration: bucketize every point, group points by
// bucket, and emit all within-bucket pairs, deduplicated across buckets.
// With max_bucket_size set, each larger bucket's member list (in ascending
// id order) is shuffled with a generator seeded by (seed, bucket id) and
// chunked into contiguous blocks of at most that size; pairs are then
// emitted per chunk. Splitting can only remove pairs.
std::set<ScoringPair> grale_pairs(const std::vector<Point>& corpus,
                                  const lsh::LshScheme& scheme,
                                  std::optional<std::size_t> max_bucket_size,
                                  std::uint64_t seed);

// One scored edge per pair. Throws NotFound-style std::invalid_argument
// when a pair references an id absent from the corpus.
std::vector<WeightedEdge> score_pairs(const std::set<ScoringPair>& pairs,
                                      const std::vector<Point>& corpus,
                                      const scorer::ModelWeights& weights);

// Per point, keep the k highest-weight incident edges (ties by ascending
// neighbor id). With union survival (default) an edge survives when either
// endpoint keeps it; with require_both it must be kept by both.
std::vector<WeightedEdge> topk_prune(const std::vector<WeightedEdge>& edges,
                                     std::size_t k, bool require_both = false);

// Edge CSV: header "id_a,id_b,weight", rows sorted by (id_a, id_b),
// weights in shortest round-trip form.
void write_edges_csv(const std::vector<WeightedEdge>& edges, const std::string& path);
std::vector<WeightedEdge> read_edges_csv(const std::string& path);

}  // namespace gus::baseline
