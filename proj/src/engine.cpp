#include "gus/engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "gus/corpus_io.hpp"
#include "gus/kernels.hpp"

namespace gus::engine {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

double percentile_of(std::vector<double> samples, double p) {
  if (samples.empty()) return 0.0;
  // Nearest rank on the ascending sample list.
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  const std::size_t index = rank == 0 ? 0 : rank - 1;
  std::nth_element(samples.begin(), samples.begin() + index, samples.end());
  return samples[index];
}

}  // namespace

void LatencyRecorder::record(double us) {
  std::lock_guard lock(mutex_);
  if (window_.size() < kWindow) {
    window_.push_back(us);
  } else {
    window_[next_] = us;
    next_ = (next_ + 1) % kWindow;
  }
  ++count_;
  const auto n = static_cast<std::uint64_t>(std::max(us, 0.0));
  const int bucket = std::min(static_cast<int>(std::bit_width(n)), 31);
  ++histogram_[static_cast<std::size_t>(bucket)];
}

nlohmann::json LatencyRecorder::to_json() const {
  std::vector<double> samples;
  nlohmann::json histogram = nlohmann::json::array();
  std::uint64_t count = 0;
  {
    std::lock_guard lock(mutex_);
    samples = window_;
    count = count_;
    for (std::size_t i = 0; i < histogram_.size(); ++i) {
      if (histogram_[i] == 0) continue;
      histogram.push_back({{"lt_us", 1ULL << i}, {"count", histogram_[i]}});
    }
  }
  return {{"count", count},
          {"p50_us", percentile_of(samples, 50)},
          {"p95_us", percentile_of(samples, 95)},
          {"p99_us", percentile_of(samples, 99)},
          {"histogram", std::move(histogram)}};
}

Engine::Engine(EngineOptions options)
    : bucketizer_(std::move(options.scheme)), default_k_(options.default_k) {
  if (default_k_ == 0) throw std::invalid_argument("default_k must be >= 1");

  std::optional<std::string> snapshot;
  if (options.bundle_dir) {
    Loaded loaded = load_artifacts(*options.bundle_dir);
    idf_ = std::move(loaded.idf);
    filter_ = std::move(loaded.filter);
    if (loaded.model) model_ = std::move(*loaded.model);
    const auto manifest = artifacts::load_manifest(
        (std::filesystem::path(*options.bundle_dir) / "manifest.json").string());
    if (manifest.snapshot_file) {
      snapshot =
          (std::filesystem::path(*options.bundle_dir) / *manifest.snapshot_file)
              .string();
    }
  }
  if (model_.layers.empty()) {
    if (!options.model_path) {
      throw std::invalid_argument(
          "engine needs a similarity model (bundle model or model_path)");
    }
    model_ = scorer::load_weights(*options.model_path);
  }

  if (options.corpus_path) {
    std::vector<Point> corpus =
        io::dedupe_last_wins(io::read_corpus(*options.corpus_path), nullptr);
    if (snapshot) {
      index_.load_snapshot(*snapshot);
      for (Point& p : corpus) {
        std::string id = p.id;
        features_.emplace(std::move(id), std::move(p));
      }
      for (const std::string& id : index_.ids_sorted()) {
        if (!features_.count(id)) {
          throw std::runtime_error("snapshot id '" + id +
                                   "' has no features in the corpus");
        }
      }
    } else {
      for (Point& p : corpus) {
        index_.upsert(p.id, emb::embed(bucketizer_.buckets(p), idf_, filter_));
        std::string id = p.id;
        features_.emplace(std::move(id), std::move(p));
      }
    }
  } else if (snapshot) {
    throw std::invalid_argument(
        "a bundle snapshot needs corpus_path for the candidate features");
  }
}

Engine::Loaded Engine::load_artifacts(const std::string& bundle_dir) const {
  const artifacts::ArtifactBundle bundle = artifacts::load_bundle(bundle_dir);
  const std::uint64_t active_hash = lsh::scheme_hash(bucketizer_.scheme());
  if (bundle.manifest.scheme_hash != active_hash) {
    throw std::runtime_error("bundle " + bundle_dir +
                             " was built under a different scheme");
  }
  Loaded loaded;
  loaded.idf = bundle.idf;
  loaded.filter = bundle.filter;
  if (bundle.manifest.model_file) {
    loaded.model = scorer::load_weights(
        (std::filesystem::path(bundle_dir) / *bundle.manifest.model_file).string());
  }
  return loaded;
}

bool Engine::upsert(Point p) {
  const auto start = Clock::now();
  if (p.id.empty()) throw std::invalid_argument("point id must be non-empty");
  const std::string id = p.id;
  // Bucketing is pure; only the embed-and-store step needs the lock.
  const auto buckets = bucketizer_.buckets(p);
  std::unique_lock lock(mutex_);
  emb::SparseEmbedding e = emb::embed(buckets, idf_, filter_);
  const bool existed = index_.upsert(id, std::move(e));
  features_[id] = std::move(p);
  lock.unlock();
  upsert_latency_.record(elapsed_us(start));
  return existed;
}

bool Engine::remove(const std::string& id) {
  const auto start = Clock::now();
  std::unique_lock lock(mutex_);
  const bool existed = index_.remove(id);
  features_.erase(id);
  lock.unlock();
  remove_latency_.record(elapsed_us(start));
  return existed;
}

Neighborhood Engine::neighbors(const NeighborsRequest& request) const {
  const auto start = Clock::now();
  if (request.id.has_value() == request.point.has_value()) {
    throw std::invalid_argument("request must carry exactly one of id / point");
  }
  if (request.k && *request.k == 0) throw std::invalid_argument("k must be >= 1");
  const std::size_t k = request.k.value_or(default_k_);

  std::shared_lock lock(mutex_);

  const Point* query_point = nullptr;
  Point local_point;
  emb::SparseEmbedding query_embedding;
  std::string exclude;
  if (request.id) {
    exclude = *request.id;
    const auto it = features_.find(exclude);
    if (it == features_.end()) throw NotFoundError("unknown id: " + exclude);
    query_point = &it->second;
    query_embedding = *index_.embedding_of(exclude);
  } else {
    local_point = *request.point;
    exclude = local_point.id;
    query_embedding = emb::embed(bucketizer_.buckets(local_point), idf_, filter_);
    query_point = &local_point;
  }

  std::vector<idx::Hit> hits;
  if (request.tau) {
    hits = index_.query_threshold(query_embedding, *request.tau, &exclude);
    if (request.k && hits.size() > *request.k) hits.resize(*request.k);
  } else {
    hits = index_.query_topk(query_embedding, k, &exclude);
  }

  Neighborhood result;
  result.k_requested = k;
  result.tau = request.tau;
  result.neighbors.reserve(hits.size());
  for (idx::Hit& hit : hits) {
    const Point& candidate = features_.at(hit.id);
    const double similarity = scorer::score(*query_point, candidate, model_).value;
    result.neighbors.push_back({std::move(hit.id), hit.dist, similarity});
  }
  lock.unlock();

  std::sort(result.neighbors.begin(), result.neighbors.end(),
            [](const NeighborEntry& a, const NeighborEntry& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              return a.id < b.id;
            });
  result.latency_us = elapsed_us(start);
  neighbors_latency_.record(result.latency_us);
  return result;
}

void Engine::reload(const std::string& bundle_dir) {
  // Parse and validate outside the lock; failures leave the engine as-is.
  Loaded loaded = load_artifacts(bundle_dir);
  std::unique_lock lock(mutex_);
  idf_ = std::move(loaded.idf);
  filter_ = std::move(loaded.filter);
  if (loaded.model) model_ = std::move(*loaded.model);
}

std::size_t Engine::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

bool Engine::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return index_.contains(id);
}

nlohmann::json Engine::stats() const {
  std::shared_lock lock(mutex_);
  nlohmann::json j = {{"points", index_.size()},
                      {"dimensions", index_.dimension_count()},
                      {"postings", index_.posting_count()},
                      {"idf_enabled", idf_.enabled()},
                      {"filter_excluded", filter_.excluded.size()},
                      {"kernels", kernels::active_name()}};
  lock.unlock();
  j["latency"] = {{"upsert", upsert_latency_.to_json()},
                  {"remove", remove_latency_.to_json()},
                  {"neighbors", neighbors_latency_.to_json()}};
  return j;
}

}  // namespace gus::engine
