#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/lsh.hpp"
#include "gus/point.hpp"

namespace gus::synth {

// Clustered synthetic corpus used by the benchmarks and test fixtures.
// Points carry one dense field "vec" (cluster center + Gaussian noise) and
// one token field "tags" (a few cluster-specific tags plus draws from a
// Zipf-like global pool). Everything is derived from `seed` through the
// project RNG, so a config uniquely determines the corpus bytes.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  std::size_t dense_dim = 16;
  std::size_t clusters = 32;
  double noise = 0.25;
  std::size_t global_pool = 400;   // size of the shared tag vocabulary
  std::size_t tags_per_point = 4;  // draws from the global pool
  std::size_t cluster_tags = 2;    // tags shared by the whole cluster
};

std::vector<Point> make_corpus(const SynthConfig& config);

// A scheme matching make_corpus output: sign bands over "vec", token
// hashing over "tags".
lsh::LshScheme default_scheme(std::uint64_t seed, std::size_t dense_dim,
                              int num_bands = 6, int planes_per_band = 8);

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& config);

}  // namespace gus::synth
