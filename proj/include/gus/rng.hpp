#pragma once

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gus::rng {

// SplitMix64. Every randomized artifact in this project goes through this
// generator so that outputs are reproducible across platforms and standard
// library versions (std::shuffle and std::normal_distribution are not
// portable across implementations).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]. Never returns 0 so it is safe under log().
  double uniform01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

// Two independent standard normals from one Box-Muller step.
struct NormalPair {
  double z0;
  double z1;
};

inline NormalPair box_muller(SplitMix64& gen) {
  const double u1 = gen.uniform01();
  const double u2 = gen.uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// n standard normals drawn in a fixed order from `seed`.
inline std::vector<double> normals(std::uint64_t seed, std::size_t n) {
  SplitMix64 gen(seed);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const NormalPair p = box_muller(gen);
    out.push_back(p.z0);
    if (out.size() < n) out.push_back(p.z1);
  }
  return out;
}

// In-place Fisher-Yates with the seeded generator.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& gen) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(gen.bounded(i + 1));
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace gus::rng
