#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gus/embedding.hpp"

namespace gus::artifacts {

// On-disk layout of a preprocess run, under one directory:
//   manifest.json   corpus size, scheme hash, parameters, file names
//   idf.json        {"total": n, "clamp": w, "stored": [[bucket, weight]...]}
//   filter.json     {"percent": x, "excluded": [bucket...]}
//   snapshot.json   optional index snapshot (see SparseIndex)
//   model.json      optional copy of the similarity model
struct Manifest {
  std::uint64_t corpus_size = 0;
  std::uint64_t scheme_hash = 0;
  std::uint64_t created_at = 0;  // unix seconds
  std::size_t idf_size_limit = 0;
  double filter_percent = 0.0;
  std::uint64_t duplicate_records = 0;
  std::uint64_t total_buckets = 0;
  std::optional<std::string> snapshot_file;
  std::optional<std::string> model_file;
};

struct ArtifactBundle {
  Manifest manifest;
  emb::IdfTable idf;
  emb::FilterSet filter;
  std::string dir;
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

void save_bundle(const ArtifactBundle& bundle);
// Loads manifest + idf + filter. The snapshot and model are left to the
// caller (they may be large and are not always wanted).
ArtifactBundle load_bundle(const std::string& dir);

// Resolves the timestamp recorded in manifests: an explicit override wins,
// then the SOURCE_DATE_EPOCH environment variable (the reproducible-builds
// convention; reruns must produce byte-identical bundles), then wall clock.
std::uint64_t resolve_timestamp(std::optional<std::uint64_t> override_value);

}  // namespace gus::artifacts
