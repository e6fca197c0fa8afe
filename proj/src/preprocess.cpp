#include "gus/preprocess.hpp"

#include <filesystem>
#include <fstream>

#include "gus/corpus_io.hpp"
#include "gus/embedding.hpp"

namespace gus::preprocess {

Result run(std::vector<Point> corpus, const lsh::LshScheme& scheme,
           const Options& options, idx::SparseIndex& index) {
  Result result;
  std::size_t duplicates = 0;
  result.corpus = io::dedupe_last_wins(std::move(corpus), &duplicates);

  const lsh::Bucketizer bucketizer(scheme);
  std::unordered_map<lsh::BucketId, std::uint64_t> stats;
  std::vector<std::set<lsh::BucketId>> buckets;
  buckets.reserve(result.corpus.size());
  for (const Point& p : result.corpus) {
    buckets.push_back(bucketizer.buckets(p));
    for (const lsh::BucketId b : buckets.back()) ++stats[b];
  }

  auto& bundle = result.bundle;
  bundle.filter = emb::build_filter_set(stats, options.filter_percent);
  bundle.idf =
      emb::build_idf_table(stats, result.corpus.size(), options.idf_size_limit);

  index.clear();
  for (std::size_t i = 0; i < result.corpus.size(); ++i) {
    index.upsert(result.corpus[i].id,
                 emb::embed(buckets[i], bundle.idf, bundle.filter));
  }

  bundle.manifest.corpus_size = result.corpus.size();
  bundle.manifest.scheme_hash = lsh::scheme_hash(scheme);
  bundle.manifest.created_at = artifacts::resolve_timestamp(options.timestamp);
  bundle.manifest.idf_size_limit = options.idf_size_limit;
  bundle.manifest.filter_percent = options.filter_percent;
  bundle.manifest.duplicate_records = duplicates;
  bundle.manifest.total_buckets = stats.size();
  return result;
}

artifacts::ArtifactBundle run_to_dir(const std::string& corpus_path,
                                     const lsh::LshScheme& scheme,
                                     const Options& options,
                                     const std::string& out_dir) {
  idx::SparseIndex index;
  Result result = run(io::read_corpus(corpus_path), scheme, options, index);
  auto& bundle = result.bundle;
  bundle.dir = out_dir;
  std::filesystem::create_directories(out_dir);

  const std::filesystem::path dir(out_dir);
  if (options.write_snapshot) {
    bundle.manifest.snapshot_file = "snapshot.json";
    index.save_snapshot((dir / "snapshot.json").string());
  }
  if (options.model_path) {
    bundle.manifest.model_file = "model.json";
    std::filesystem::copy_file(*options.model_path, dir / "model.json",
                               std::filesystem::copy_options::overwrite_existing);
  }
  artifacts::save_bundle(bundle);
  return bundle;
}

}  // namespace gus::preprocess
