#include <doctest.h>

#include <algorithm>

#include "gus/baseline.hpp"
#include "gus/hash.hpp"
#include "gus/rng.hpp"
#include "gus/synth.hpp"
#include "support/support.hpp"

using gus::baseline::grale_pairs;
using gus::baseline::ScoringPair;
using gus::baseline::topk_prune;
using gus::baseline::WeightedEdge;
using gus::Point;

namespace {

gus::scorer::ModelWeights token_model() {
  gus::scorer::ModelWeights m;
  m.input_spec = {{"b", gus::scorer::FieldSpec::Kind::kTokens, 0}};
  m.layers.push_back(gus::scorer::Layer{2, 2, {1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}});
  m.layers.push_back(gus::scorer::Layer{1, 2, {1.0, 0.5}, {0.0}});
  return m;
}

}  // namespace

TEST_SUITE("baseline") {

TEST_CASE("three-point example yields the two candidate pairs") {
  const auto pairs = grale_pairs(testsupport::three_point_corpus(),
                                 testsupport::token_only_scheme(), std::nullopt, 0);
  CHECK(pairs == std::set<ScoringPair>{{"p1", "p2"}, {"p2", "p3"}});
}

TEST_CASE("a single bucket of n points emits n choose 2 pairs") {
  std::vector<Point> corpus;
  for (int i = 0; i < 9; ++i) {
    corpus.push_back(testsupport::token_point("p" + std::to_string(i), {"common"}));
  }
  const auto pairs =
      grale_pairs(corpus, testsupport::token_only_scheme(), std::nullopt, 0);
  CHECK(pairs.size() == 36);
}

TEST_CASE("bucket splitting chunks after a seeded shuffle") {
  std::vector<Point> corpus;
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("p" + std::to_string(i));
    corpus.push_back(testsupport::token_point(ids.back(), {"common"}));
  }
  const auto pairs = grale_pairs(corpus, testsupport::token_only_scheme(), 5, 77);
  CHECK(pairs.size() <= 20);  // two chunks of 5 -> at most 2 * C(5,2)

  // Reference replay: same generator, same shuffle, same chunking.
  const auto bucket = testsupport::token_bucket_id("common");
  std::sort(ids.begin(), ids.end());
  gus::rng::SplitMix64 gen(gus::hashing::Hash64(77).u64(bucket).digest());
  gus::rng::shuffle(ids, gen);
  std::set<ScoringPair> expected;
  for (std::size_t start = 0; start < ids.size(); start += 5) {
    for (std::size_t i = start; i < start + 5; ++i) {
      for (std::size_t j = i + 1; j < start + 5; ++j) {
        expected.insert(gus::baseline::make_pair_canonical(ids[i], ids[j]));
      }
    }
  }
  CHECK(pairs == expected);
}

TEST_CASE("pairs appearing in several buckets are deduplicated") {
  const std::vector<Point> corpus = {testsupport::token_point("a", {"t", "u"}),
                                     testsupport::token_point("b", {"t", "u"})};
  const auto pairs =
      grale_pairs(corpus, testsupport::token_only_scheme(), std::nullopt, 0);
  CHECK(pairs.size() == 1);
}

TEST_CASE("splitting only removes pairs") {
  const auto corpus = gus::synth::make_corpus({.seed = 41, .count = 150});
  const auto scheme = gus::synth::default_scheme(5, 16, 4, 4);
  const auto full = grale_pairs(corpus, scheme, std::nullopt, 0);
  for (const std::size_t m : {4, 16, 64}) {
    const auto split = grale_pairs(corpus, scheme, m, 3);
    CHECK(split.size() <= full.size());
    CHECK(std::includes(full.begin(), full.end(), split.begin(), split.end()));
  }
}

TEST_CASE("pair enumeration is independent of corpus order") {
  auto corpus = gus::synth::make_corpus({.seed = 45, .count = 80});
  const auto scheme = gus::synth::default_scheme(6, 16, 3, 4);
  const auto forward = grale_pairs(corpus, scheme, 5, 11);
  std::reverse(corpus.begin(), corpus.end());
  CHECK(grale_pairs(corpus, scheme, 5, 11) == forward);
}

TEST_CASE("determinism under a fixed seed") {
  const auto corpus = gus::synth::make_corpus({.seed = 43, .count = 100});
  const auto scheme = gus::synth::default_scheme(5, 16, 4, 4);
  CHECK(grale_pairs(corpus, scheme, 6, 9) == grale_pairs(corpus, scheme, 6, 9));
  CHECK(grale_pairs(corpus, scheme, 6, 9) != grale_pairs(corpus, scheme, 6, 10));
}

TEST_CASE("score_pairs matches direct scorer calls and rejects unknown ids") {
  const auto corpus = testsupport::three_point_corpus();
  const auto model = token_model();
  const auto pairs = grale_pairs(corpus, testsupport::token_only_scheme(),
                                 std::nullopt, 0);
  const auto edges = gus::baseline::score_pairs(pairs, corpus, model);
  REQUIRE(edges.size() == 2);
  for (const auto& e : edges) {
    const Point* pa = nullptr;
    const Point* pb = nullptr;
    for (const auto& p : corpus) {
      if (p.id == e.a) pa = &p;
      if (p.id == e.b) pb = &p;
    }
    CHECK(e.weight == gus::scorer::score(*pa, *pb, model).value);
    CHECK(e.weight == gus::scorer::score(*pb, *pa, model).value);
  }
  CHECK(gus::baseline::score_pairs({}, corpus, model).empty());
  CHECK_THROWS_AS(gus::baseline::score_pairs({{"p1", "zz"}}, corpus, model),
                  std::invalid_argument);
}

TEST_CASE("top-k prune keeps everything when k covers the degree") {
  const std::vector<WeightedEdge> edges = {{"a", "b", 0.9}, {"a", "c", 0.5},
                                           {"b", "c", 0.1}};
  CHECK(topk_prune(edges, 2) == edges);
  CHECK(topk_prune(edges, 99) == edges);
}

TEST_CASE("star graph with k=1 survives entirely under union survival") {
  // The center keeps only its best edge, but every leaf keeps its only one.
  const std::vector<WeightedEdge> edges = {
      {"hub", "l1", 0.9}, {"hub", "l2", 0.7}, {"hub", "l3", 0.4}};
  CHECK(topk_prune(edges, 1) == edges);
  // Requiring both endpoints keeps only the hub's favorite.
  const auto strict = topk_prune(edges, 1, /*require_both=*/true);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0] == WeightedEdge{"hub", "l1", 0.9});
}

TEST_CASE("triangle with k=1 drops the weakest edge") {
  const std::vector<WeightedEdge> edges = {
      {"a", "b", 0.9}, {"a", "c", 0.5}, {"b", "c", 0.1}};
  const auto kept = topk_prune(edges, 1);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == WeightedEdge{"a", "b", 0.9});
  CHECK(kept[1] == WeightedEdge{"a", "c", 0.5});
}

TEST_CASE("pruning only removes edges") {
  gus::rng::SplitMix64 gen(47);
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < 60; ++i) {
    const auto a = "p" + std::to_string(gen.bounded(15));
    const auto b = "p" + std::to_string(gen.bounded(15));
    if (a == b) continue;
    auto pair = gus::baseline::make_pair_canonical(a, b);
    edges.push_back({pair.first, pair.second, gen.uniform01()});
  }
  for (const std::size_t k : {1, 2, 5}) {
    const auto kept = topk_prune(edges, k);
    CHECK(kept.size() <= edges.size());
    for (const auto& e : kept) {
      CHECK(std::find(edges.begin(), edges.end(), e) != edges.end());
    }
  }
}

TEST_CASE("edge csv round-trips in canonical order") {
  testsupport::TempDir tmp("edges");
  const std::vector<WeightedEdge> edges = {
      {"b", "c", 0.125}, {"a", "z", 0.7071067811865476}, {"a", "b", 1e-9}};
  gus::baseline::write_edges_csv(edges, tmp.file("e.csv"));
  const auto loaded = gus::baseline::read_edges_csv(tmp.file("e.csv"));
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0] == WeightedEdge{"a", "b", 1e-9});
  CHECK(loaded[1] == WeightedEdge{"a", "z", 0.7071067811865476});
  CHECK(loaded[2] == WeightedEdge{"b", "c", 0.125});
}

TEST_CASE("canonical pair rejects self pairs and orders endpoints") {
  CHECK(gus::baseline::make_pair_canonical("z", "a") == ScoringPair{"a", "z"});
  CHECK_THROWS_AS(gus::baseline::make_pair_canonical("a", "a"), std::invalid_argument);
}

}  // TEST_SUITE
