#include "gus/lsh.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

#include "gus/hash.hpp"
#include "gus/kernels.hpp"
#include "gus/rng.hpp"

namespace gus::lsh {

namespace {

// Tags separating the dense-band and token namespaces in the hash payload.
constexpr std::uint64_t kBandKind = 0;
constexpr std::uint64_t kTokenKind = 1;

std::uint64_t plane_seed(std::uint64_t scheme_seed, std::uint64_t salt,
                         const std::string& field, int band, int plane) {
  return hashing::Hash64(scheme_seed)
      .u64(salt)
      .str(field)
      .u64(static_cast<std::uint64_t>(band))
      .u64(static_cast<std::uint64_t>(plane))
      .digest();
}

BucketId band_bucket(std::uint64_t salt, const std::string& field, int band,
                     std::uint64_t sign_bits, int planes) {
  return hashing::Hash64(salt)
      .str(field)
      .u64(kBandKind)
      .u64(static_cast<std::uint64_t>(band))
      .u64(sign_bits)
      .u64(static_cast<std::uint64_t>(planes))
      .digest();
}

BucketId token_bucket(std::uint64_t salt, const std::string& field,
                      const std::string& token) {
  return hashing::Hash64(salt).str(field).u64(kTokenKind).str(token).digest();
}

}  // namespace

void validate(const LshScheme& scheme) {
  for (const auto& [name, f] : scheme.dense_fields) {
    if (f.dim == 0) {
      throw std::invalid_argument("dense field '" + name + "': dim must be >= 1");
    }
    if (f.num_bands < 1) {
      throw std::invalid_argument("dense field '" + name + "': num_bands must be >= 1");
    }
    if (f.planes_per_band < 1 || f.planes_per_band > 64) {
      throw std::invalid_argument("dense field '" + name +
                                  "': planes_per_band must be in [1, 64]");
    }
  }
}

std::vector<double> hyperplane(const LshScheme& scheme, const std::string& field,
                               int band, int plane) {
  const auto it = scheme.dense_fields.find(field);
  if (it == scheme.dense_fields.end()) {
    throw std::invalid_argument("unknown dense field '" + field + "'");
  }
  return rng::normals(plane_seed(scheme.seed, it->second.salt, field, band, plane),
                      it->second.dim);
}

Bucketizer::Bucketizer(LshScheme scheme) : scheme_(std::move(scheme)) {
  validate(scheme_);
  for (const auto& [name, spec] : scheme_.dense_fields) {
    DenseField f;
    f.name = name;
    f.spec = spec;
    const std::size_t rows =
        static_cast<std::size_t>(spec.num_bands) * spec.planes_per_band;
    f.normals.reserve(rows * spec.dim);
    for (int band = 0; band < spec.num_bands; ++band) {
      for (int plane = 0; plane < spec.planes_per_band; ++plane) {
        const auto normal = rng::normals(
            plane_seed(scheme_.seed, spec.salt, name, band, plane), spec.dim);
        f.normals.insert(f.normals.end(), normal.begin(), normal.end());
      }
    }
    f.zero_bias.assign(rows, 0.0);
    dense_.push_back(std::move(f));
  }
}

std::set<BucketId> Bucketizer::buckets(const Point& p) const {
  const auto& ops = kernels::active_ops();
  std::set<BucketId> out;

  std::vector<double> proj;
  for (const DenseField& f : dense_) {
    const auto it = p.dense.find(f.name);
    if (it == p.dense.end()) continue;
    const auto& vec = it->second;
    if (vec.size() != f.spec.dim) {
      throw std::invalid_argument("point '" + p.id + "' dense field '" + f.name +
                                  "': expected dim " + std::to_string(f.spec.dim) +
                                  ", got " + std::to_string(vec.size()));
    }
    const std::size_t rows =
        static_cast<std::size_t>(f.spec.num_bands) * f.spec.planes_per_band;
    proj.resize(rows);
    ops.matvec_bias(f.normals.data(), rows, f.spec.dim, vec.data(),
                    f.zero_bias.data(), proj.data());
    for (int band = 0; band < f.spec.num_bands; ++band) {
      std::uint64_t bits = 0;
      for (int plane = 0; plane < f.spec.planes_per_band; ++plane) {
        // Ties at exactly 0 map to bit 1.
        if (proj[static_cast<std::size_t>(band) * f.spec.planes_per_band + plane] >= 0.0) {
          bits |= (1ULL << plane);
        }
      }
      out.insert(band_bucket(f.spec.salt, f.name, band, bits, f.spec.planes_per_band));
    }
  }

  for (const auto& [field, fs] : scheme_.token_fields) {
    if (!fs.enabled) continue;
    const auto it = p.tokens.find(field);
    if (it == p.tokens.end()) continue;
    for (const std::string& token : it->second) {
      out.insert(token_bucket(fs.salt, field, token));
    }
  }

  return out;
}

std::set<BucketId> bucketize(const Point& p, const LshScheme& scheme) {
  return Bucketizer(scheme).buckets(p);
}

std::unordered_map<BucketId, std::uint64_t> bucket_stats(
    const std::vector<Point>& corpus, const LshScheme& scheme) {
  const Bucketizer bucketizer(scheme);
  std::unordered_map<BucketId, std::uint64_t> counts;
  for (const Point& p : corpus) {
    for (const BucketId b : bucketizer.buckets(p)) ++counts[b];
  }
  return counts;
}

std::uint64_t scheme_hash(const LshScheme& scheme) {
  hashing::Hash64 h(scheme.seed);
  h.u64(scheme.dense_fields.size());
  for (const auto& [name, f] : scheme.dense_fields) {
    h.str(name)
        .u64(f.dim)
        .u64(static_cast<std::uint64_t>(f.num_bands))
        .u64(static_cast<std::uint64_t>(f.planes_per_band))
        .u64(f.salt);
  }
  h.u64(scheme.token_fields.size());
  for (const auto& [name, f] : scheme.token_fields) {
    h.str(name).u64(f.enabled ? 1 : 0).u64(f.salt);
  }
  return h.digest();
}

LshScheme scheme_from_json(const nlohmann::json& j) {
  LshScheme scheme;
  scheme.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("dense_fields")) {
    for (const auto& [name, f] : j.at("dense_fields").items()) {
      DenseFieldScheme fs;
      fs.dim = f.at("dim").get<std::size_t>();
      fs.num_bands = f.value("num_bands", 1);
      fs.planes_per_band = f.value("planes_per_band", 1);
      fs.salt = f.value("salt", std::uint64_t{0});
      scheme.dense_fields.emplace(name, fs);
    }
  }
  if (j.contains("token_fields")) {
    for (const auto& [name, f] : j.at("token_fields").items()) {
      TokenFieldScheme fs;
      fs.enabled = f.value("enabled", true);
      fs.salt = f.value("salt", std::uint64_t{0});
      scheme.token_fields.emplace(name, fs);
    }
  }
  validate(scheme);
  return scheme;
}

nlohmann::json scheme_to_json(const LshScheme& scheme) {
  nlohmann::json j;
  j["seed"] = scheme.seed;
  j["dense_fields"] = nlohmann::json::object();
  for (const auto& [name, f] : scheme.dense_fields) {
    j["dense_fields"][name] = {{"dim", f.dim},
                               {"num_bands", f.num_bands},
                               {"planes_per_band", f.planes_per_band},
                               {"salt", f.salt}};
  }
  j["token_fields"] = nlohmann::json::object();
  for (const auto& [name, f] : scheme.token_fields) {
    j["token_fields"][name] = {{"enabled", f.enabled}, {"salt", f.salt}};
  }
  return j;
}

}  // namespace gus::lsh
