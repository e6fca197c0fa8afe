#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/point.hpp"

namespace gus::lsh {

using BucketId = std::uint64_t;

// Sign-random-projection bands for one dense field. Each band hashes the
// sign pattern of `planes_per_band` seeded hyperplane projections into one
// bucket ID. planes_per_band is capped at 64 so the pattern packs into a
// single word of the hash payload.
struct DenseFieldScheme {
  std::size_t dim = 0;
  int num_bands = 1;
  int planes_per_band = 1;
  std::uint64_t salt = 0;
};

struct TokenFieldScheme {
  bool enabled = true;
  std::uint64_t salt = 0;
};

struct LshScheme {
  std::uint64_t seed = 0;
  std::map<std::string, DenseFieldScheme> dense_fields;
  std::map<std::string, TokenFieldScheme> token_fields;
};

// Throws std::invalid_argument on out-of-range band/plane counts.
void validate(const LshScheme& scheme);

// The hyperplane normal for (field, band, plane): standard normal
// coordinates drawn in index order from a stream seeded by
// (scheme.seed, field salt, field name, band, plane). Exposed so tests and
// diagnostics can re-derive the projections.
std::vector<double> hyperplane(const LshScheme& scheme, const std::string& field,
                               int band, int plane);

// Maps points to bucket IDs: one per (dense field, band) from the band's
// sign pattern (projection >= 0 sets the plane's bit), plus one per token
// of each enabled token field. The hyperplane normals are materialized once
// at construction; buckets() is then a pure function of the point's
// features and is safe to call concurrently.
//
// Dense fields missing from the point contribute nothing; a present field
// with the wrong length throws std::invalid_argument.
class Bucketizer {
 public:
  explicit Bucketizer(LshScheme scheme);

  std::set<BucketId> buckets(const Point& p) const;
  const LshScheme& scheme() const { return scheme_; }

 private:
  struct DenseField {
    std::string name;
    DenseFieldScheme spec;
    std::vector<double> normals;  // (num_bands * planes_per_band) x dim, row-major
    std::vector<double> zero_bias;
  };

  LshScheme scheme_;
  std::vector<DenseField> dense_;
};

// One-shot convenience wrapper around Bucketizer.
std::set<BucketId> bucketize(const Point& p, const LshScheme& scheme);

// Number of distinct points whose bucket set contains each bucket.
std::unordered_map<BucketId, std::uint64_t> bucket_stats(
    const std::vector<Point>& corpus, const LshScheme& scheme);

// Stable content hash of the scheme, recorded in artifact manifests so a
// serving process can refuse artifacts built under a different scheme.
std::uint64_t scheme_hash(const LshScheme& scheme);

LshScheme scheme_from_json(const nlohmann::json& j);
nlohmann::json scheme_to_json(const LshScheme& scheme);

}  // namespace gus::lsh
