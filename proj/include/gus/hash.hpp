#pragma once

#include <cstdint>
#include <cstddef>
#include <string_view>

namespace gus::hashing {

// Seedable 64-bit hash over a canonical byte stream: FNV-1a with the seed
// folded into the offset basis, followed by a SplitMix64-style finalizer for
// avalanche. Values feed bucket IDs and must stay stable forever; do not
// change the constants or the byte layout below.
//
// Canonical byte layout (little endian):
//   u64(x)    -> 8 bytes, least significant first
//   str(s)    -> u64(s.size()) then the raw bytes of s
// Callers append fields in a fixed documented order, e.g. a dense band
// bucket is u64(salt) str(field) u64(0) u64(band) u64(signbits) u64(planes)
// and a token bucket is u64(salt) str(field) u64(1) str(token).
class Hash64 {
 public:
  explicit Hash64(std::uint64_t seed = 0)
      : state_(kOffsetBasis ^ (seed * 0x9E3779B97F4A7C15ULL)) {}

  Hash64& u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      byte(static_cast<unsigned char>(v & 0xFF));
      v >>= 8;
    }
    return *this;
  }

  Hash64& str(std::string_view s) {
    u64(s.size());
    for (const char c : s) byte(static_cast<unsigned char>(c));
    return *this;
  }

  std::uint64_t digest() const {
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kOffsetBasis = 0xCBF29CE484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001B3ULL;

  void byte(unsigned char b) {
    state_ ^= b;
    state_ *= kPrime;
  }

  std::uint64_t state_;
};

}  // namespace gus::hashing
