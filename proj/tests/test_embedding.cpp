#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include "gus/embedding.hpp"
#include "support/support.hpp"

using gus::emb::build_filter_set;
using gus::emb::build_idf_table;
using gus::emb::embed;
using gus::emb::FilterSet;
using gus::emb::IdfTable;
using gus::emb::SparseEmbedding;
using gus::lsh::BucketId;

namespace {

using Stats = std::unordered_map<BucketId, std::uint64_t>;

const IdfTable kNoIdf;
const FilterSet kNoFilter;

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("unit weights on the raw bucket set") {
  // The two-bucket example embedding: every present dimension at 1.0.
  const auto e = embed({1, 2}, kNoIdf, kNoFilter);
  CHECK(e.dims == std::vector<BucketId>{1, 2});
  CHECK(e.weights == std::vector<double>{1.0, 1.0});
}

TEST_CASE("full exclusion yields an empty embedding") {
  FilterSet filter;
  filter.excluded = {1};
  CHECK(embed({1}, kNoIdf, filter).empty());
}

TEST_CASE("idf weight is ln(total/count)") {
  const IdfTable idf = build_idf_table(Stats{{5, 10}}, 100, 8);
  const auto e = embed({5}, idf, kNoFilter);
  REQUIRE(e.size() == 1);
  CHECK(e.weights[0] == doctest::Approx(2.302585092994046).epsilon(1e-12));
}

TEST_CASE("dist over the three example embeddings") {
  const auto p1 = embed({1, 2}, kNoIdf, kNoFilter);
  const auto p2 = embed({1}, kNoIdf, kNoFilter);
  const auto p3 = embed({2}, kNoIdf, kNoFilter);
  CHECK(gus::emb::dist(p1, p2) == -1.0);
  CHECK(gus::emb::dist(p1, p3) == -1.0);
  CHECK(gus::emb::dist(p2, p3) == 0.0);  // disjoint
}

TEST_CASE("self distance is minus the squared norm") {
  const auto e = SparseEmbedding::from_pairs({{1, 2.0}, {2, 1.0}});
  CHECK(gus::emb::dist(e, e) == -5.0);
  CHECK(e.norm_squared() == 5.0);
}

TEST_CASE("dist symmetry and sign on random embeddings") {
  gus::rng::SplitMix64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testsupport::random_embedding(gen, 50, 12);
    const auto b = testsupport::random_embedding(gen, 50, 12);
    const double d = gus::emb::dist(a, b);
    CHECK(d == gus::emb::dist(b, a));
    CHECK(d <= 0.0);
    // Negative distance exactly when a dimension is shared.
    std::set<BucketId> da(a.dims.begin(), a.dims.end());
    bool shared = false;
    for (const BucketId dim : b.dims) shared |= da.count(dim) > 0;
    CHECK((d < 0.0) == shared);
  }
}

TEST_CASE("idf_lookup stored and clamp paths") {
  IdfTable idf;
  idf.size_limit = 4;
  idf.clamp_weight = 1.4;
  idf.stored = {{7, 4.12}};
  CHECK(gus::emb::idf_lookup(7, idf) == 4.12);
  CHECK(gus::emb::idf_lookup(8, idf) == 1.4);
}

TEST_CASE("keep-top-1 table clamps everything else") {
  const IdfTable idf = build_idf_table(Stats{{1, 1}, {2, 2}, {3, 4}}, 4, 1);
  REQUIRE(idf.stored.size() == 1);
  CHECK(idf.stored.at(1) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(idf.clamp_weight == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(gus::emb::idf_lookup(3, idf) == idf.clamp_weight);
}

TEST_CASE("keep-top-2 table") {
  const IdfTable idf = build_idf_table(Stats{{1, 1}, {2, 2}, {3, 4}}, 4, 2);
  REQUIRE(idf.stored.size() == 2);
  CHECK(idf.stored.at(1) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(idf.stored.at(2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(idf.clamp_weight == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bucket present in every point floors at the positivity bound") {
  const IdfTable idf = build_idf_table(Stats{{9, 50}}, 50, 4);
  CHECK(idf.stored.at(9) == gus::emb::kWeightFloor);
  const auto e = embed({9}, idf, kNoFilter);
  CHECK(e.weights[0] > 0.0);
}

TEST_CASE("size limit zero disables the table") {
  const IdfTable idf = build_idf_table(Stats{{1, 1}}, 10, 0);
  CHECK(!idf.enabled());
  const auto e = embed({1, 2}, idf, kNoFilter);
  CHECK(e.weights == std::vector<double>{1.0, 1.0});
}

TEST_CASE("size limit at least the bucket count stores everything") {
  const Stats stats{{1, 1}, {2, 2}, {3, 5}, {4, 10}};
  const IdfTable idf = build_idf_table(stats, 10, 99);
  CHECK(idf.stored.size() == 4);
  CHECK(idf.clamp_weight == gus::emb::kWeightFloor);  // ln(10/10) floored
}

TEST_CASE("idf ties at the boundary break by ascending bucket id") {
  // Buckets 4 and 9 tie; the table keeps the smaller id.
  const IdfTable idf = build_idf_table(Stats{{9, 2}, {4, 2}, {1, 1}}, 8, 2);
  CHECK(idf.stored.count(1) == 1);
  CHECK(idf.stored.count(4) == 1);
  CHECK(idf.stored.count(9) == 0);
}

TEST_CASE("filter percent zero excludes nothing") {
  CHECK(build_filter_set(Stats{{1, 5}, {2, 1}}, 0.0).excluded.empty());
}

TEST_CASE("ten buckets at ten percent excludes exactly the largest") {
  Stats stats;
  for (BucketId b = 0; b < 10; ++b) stats[b] = b + 1;
  const FilterSet filter = build_filter_set(stats, 10.0);
  REQUIRE(filter.excluded.size() == 1);
  CHECK(filter.contains(9));
}

TEST_CASE("filter percent hundred empties every embedding") {
  Stats stats{{1, 3}, {2, 1}, {3, 2}};
  const FilterSet filter = build_filter_set(stats, 100.0);
  CHECK(filter.excluded.size() == 3);
  CHECK(embed({1, 2, 3}, kNoIdf, filter).empty());
}

TEST_CASE("filter matches the sort oracle on random count maps") {
  gus::rng::SplitMix64 gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    Stats stats;
    const std::size_t n = 1 + gen.bounded(60);
    for (std::size_t i = 0; i < n; ++i) stats[gen.bounded(200)] = 1 + gen.bounded(9);
    const double percent = static_cast<double>(gen.bounded(101));
    const FilterSet filter = build_filter_set(stats, percent);
    const auto expected = testsupport::oracle_filter(stats, percent);
    CHECK(std::set<BucketId>(filter.excluded.begin(), filter.excluded.end()) == expected);
  }
}

TEST_CASE("filtered embedding dimensions are a subset, monotone in the filter") {
  gus::rng::SplitMix64 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    std::set<BucketId> buckets;
    for (int i = 0; i < 20; ++i) buckets.insert(gen.bounded(40));

    FilterSet small, large;
    for (const BucketId b : buckets) {
      if (gen.uniform01() < 0.2) small.excluded.insert(b);
    }
    large.excluded = small.excluded;
    for (const BucketId b : buckets) {
      if (gen.uniform01() < 0.2) large.excluded.insert(b);
    }

    const auto none = embed(buckets, kNoIdf, kNoFilter);
    const auto with_small = embed(buckets, kNoIdf, small);
    const auto with_large = embed(buckets, kNoIdf, large);
    const std::set<BucketId> d0(none.dims.begin(), none.dims.end());
    const std::set<BucketId> d1(with_small.dims.begin(), with_small.dims.end());
    const std::set<BucketId> d2(with_large.dims.begin(), with_large.dims.end());
    CHECK(std::includes(d0.begin(), d0.end(), d1.begin(), d1.end()));
    CHECK(std::includes(d1.begin(), d1.end(), d2.begin(), d2.end()));
  }
}

TEST_CASE("canonical form round-trips through embed") {
  const auto e = embed({5, 3, 8, 1}, kNoIdf, kNoFilter);
  CHECK(e.is_canonical());
  const std::set<BucketId> dims(e.dims.begin(), e.dims.end());
  const auto again = embed(dims, kNoIdf, kNoFilter);
  CHECK(e == again);
}

TEST_CASE("from_pairs rejects non-positive weights and duplicates") {
  CHECK_THROWS_AS(SparseEmbedding::from_pairs({{1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(SparseEmbedding::from_pairs({{1, -2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(SparseEmbedding::from_pairs({{1, 1.0}, {1, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("idf and filter artifacts round-trip through json") {
  const IdfTable idf = build_idf_table(Stats{{1, 1}, {2, 2}, {3, 4}}, 4, 2);
  const IdfTable idf2 = gus::emb::idf_from_json(gus::emb::idf_to_json(idf), 2);
  CHECK(idf2.total_points == idf.total_points);
  CHECK(idf2.clamp_weight == idf.clamp_weight);
  CHECK(idf2.stored.size() == idf.stored.size());
  for (const auto& [b, w] : idf.stored) CHECK(idf2.stored.at(b) == w);

  FilterSet filter = build_filter_set(Stats{{1, 3}, {2, 1}}, 50.0);
  const FilterSet filter2 = gus::emb::filter_from_json(gus::emb::filter_to_json(filter));
  CHECK(filter2.percent == filter.percent);
  CHECK(filter2.excluded == filter.excluded);
}

}  // TEST_SUITE
