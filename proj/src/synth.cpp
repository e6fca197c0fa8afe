#include "gus/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

#include "gus/rng.hpp"

namespace gus::synth {

namespace {

// Zipf-like draw: tag i has weight 1/(i+1). Cumulative weights are
// precomputed once; draws binary-search a uniform.
class ZipfPool {
 public:
  explicit ZipfPool(std::size_t size) {
    cumulative_.reserve(size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      total += 1.0 / static_cast<double>(i + 1);
      cumulative_.push_back(total);
    }
  }

  std::size_t draw(rng::SplitMix64& gen) const {
    const double u = gen.uniform01() * cumulative_.back();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::string padded_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%08zu", i);
  return buf;
}

}  // namespace

std::vector<Point> make_corpus(const SynthConfig& config) {
  rng::SplitMix64 gen(config.seed);
  const std::size_t clusters = std::max<std::size_t>(config.clusters, 1);

  std::vector<std::vector<double>> centers(clusters);
  for (auto& center : centers) {
    center.reserve(config.dense_dim);
    while (center.size() < config.dense_dim) {
      const auto pair = rng::box_muller(gen);
      center.push_back(pair.z0);
      if (center.size() < config.dense_dim) center.push_back(pair.z1);
    }
  }

  const ZipfPool pool(std::max<std::size_t>(config.global_pool, 1));

  std::vector<Point> corpus;
  corpus.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    const std::size_t cluster = gen.bounded(clusters);
    Point p;
    p.id = padded_id(i);

    std::vector<double> vec;
    vec.reserve(config.dense_dim);
    while (vec.size() < config.dense_dim) {
      const auto pair = rng::box_muller(gen);
      vec.push_back(pair.z0);
      if (vec.size() < config.dense_dim) vec.push_back(pair.z1);
    }
    for (std::size_t d = 0; d < config.dense_dim; ++d) {
      vec[d] = centers[cluster][d] + config.noise * vec[d];
    }
    p.dense.emplace("vec", std::move(vec));

    std::vector<std::string> tags;
    for (std::size_t t = 0; t < config.cluster_tags; ++t) {
      tags.push_back("c" + std::to_string(cluster) + "_" + std::to_string(t));
    }
    for (std::size_t t = 0; t < config.tags_per_point; ++t) {
      tags.push_back("g" + std::to_string(pool.draw(gen)));
    }
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    p.tokens.emplace("tags", std::move(tags));

    corpus.push_back(std::move(p));
  }
  return corpus;
}

lsh::LshScheme default_scheme(std::uint64_t seed, std::size_t dense_dim,
                              int num_bands, int planes_per_band) {
  lsh::LshScheme scheme;
  scheme.seed = seed;
  scheme.dense_fields.emplace(
      "vec", lsh::DenseFieldScheme{dense_dim, num_bands, planes_per_band, 0});
  scheme.token_fields.emplace("tags", lsh::TokenFieldScheme{true, 0});
  return scheme;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.seed = j.value("seed", c.seed);
  c.count = j.value("count", c.count);
  c.dense_dim = j.value("dense_dim", c.dense_dim);
  c.clusters = j.value("clusters", c.clusters);
  c.noise = j.value("noise", c.noise);
  c.global_pool = j.value("global_pool", c.global_pool);
  c.tags_per_point = j.value("tags_per_point", c.tags_per_point);
  c.cluster_tags = j.value("cluster_tags", c.cluster_tags);
  return c;
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"count", c.count},
          {"dense_dim", c.dense_dim},
          {"clusters", c.clusters},
          {"noise", c.noise},
          {"global_pool", c.global_pool},
          {"tags_per_point", c.tags_per_point},
          {"cluster_tags", c.cluster_tags}};
}

}  // namespace gus::synth
