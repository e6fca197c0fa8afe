#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gus/artifacts.hpp"
#include "gus/lsh.hpp"
#include "gus/point.hpp"
#include "gus/sparse_index.hpp"

namespace gus::preprocess {

struct Options {
  std::size_t idf_size_limit = 0;
  double filter_percent = 0.0;
  bool write_snapshot = true;
  std::optional<std::string> model_path;  // copied into the bundle
  std::optional<std::uint64_t> timestamp;
};

struct Result {
  artifacts::ArtifactBundle bundle;
  std::vector<Point> corpus;  // deduplicated, file order
};

// Offline pipeline over an already-parsed corpus: dedupe (last record
// wins), bucket stats on the unfiltered stream, filter and IDF artifacts
// from those stats, then embed and bulk-load every point. Fills `index`
// (replacing its contents) and returns the corresponding bundle.
Result run(std::vector<Point> corpus, const lsh::LshScheme& scheme,
           const Options& options, idx::SparseIndex& index);

// File-level variant: reads the corpus, runs the pipeline and writes the
// bundle (idf.json, filter.json, manifest.json, optional snapshot.json and
// model.json copy) under out_dir.
artifacts::ArtifactBundle run_to_dir(const std::string& corpus_path,
                                     const lsh::LshScheme& scheme,
                                     const Options& options,
                                     const std::string& out_dir);

}  // namespace gus::preprocess
