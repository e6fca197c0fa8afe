#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/baseline.hpp"
#include "gus/engine.hpp"
#include "gus/lsh.hpp"
#include "gus/point.hpp"
#include "gus/scorer.hpp"

namespace gus::bench {

struct GraphParams {
  std::size_t scann_nn = 10;  // 0 retrieves all strict-negative candidates
  std::size_t idf_size_limit = 0;
  double filter_percent = 0.0;
  std::optional<std::size_t> top_k;  // post-pruning of the scored edges
};

// Offline batch equivalent of the dynamic pipeline: preprocess the corpus,
// retrieve every point's candidates (top scann_nn, or all strict-negative
// when scann_nn is 0), score each deduplicated pair once, optionally
// Top-K-prune. A dynamic engine loaded from the same bundle and replayed
// point by point yields exactly these edges.
std::vector<baseline::WeightedEdge> offline_graph(const std::vector<Point>& corpus,
                                                  const lsh::LshScheme& scheme,
                                                  const scorer::ModelWeights& model,
                                                  const GraphParams& params);

struct PercentileCurve {
  struct Row {
    int percentile;
    double edge_weight;
  };
  std::vector<Row> rows;  // 101 rows (0..100); empty when there are no edges
  std::size_t total_edges = 0;
};

// Nearest-rank sampling of the descending weight list: percentile p reads
// the weight at rank floor(p*N/100)+1 (clamped to N). Non-increasing in p.
PercentileCurve percentile_curve(const std::vector<baseline::WeightedEdge>& edges);

// CSV: header "percentile,edge_weight", one row per percentile.
void write_curve_csv(const PercentileCurve& curve, const std::string& path);

enum class Weighting { kUnit, kIdf };

struct PairEquivalenceReport {
  bool equal = false;
  std::vector<baseline::ScoringPair> missing;  // bucket pairs not retrieved
  std::vector<baseline::ScoringPair> extra;    // retrieved without a shared bucket
};

// Checks that strict-negative threshold retrieval over the embeddings
// (no filtering, unit or full-table IDF weights) returns exactly the
// bucket-sharing pairs of the batch baseline.
PairEquivalenceReport check_pair_equivalence(const std::vector<Point>& corpus,
                                             const lsh::LshScheme& scheme,
                                             Weighting weighting);

struct LatencyReport {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  std::size_t samples = 0;
  double mean_cpu_ms = 0.0;  // process CPU time per request
  double max_rss_mib = 0.0;  // peak resident set of the process
};

nlohmann::json latency_report_to_json(const LatencyReport& report);

// Anything that can answer the two timed calls: the in-process engine or
// an HTTP client talking to a served one.
class EngineClient {
 public:
  virtual ~EngineClient() = default;
  virtual engine::Neighborhood neighbors(const engine::NeighborsRequest& request) = 0;
  virtual bool upsert(const Point& p) = 0;
};

class LocalEngineClient : public EngineClient {
 public:
  explicit LocalEngineClient(engine::Engine& engine) : engine_(engine) {}
  engine::Neighborhood neighbors(const engine::NeighborsRequest& request) override;
  bool upsert(const Point& p) override;

 private:
  engine::Engine& engine_;
};

struct BenchResult {
  LatencyReport query;
  LatencyReport upsert;
};

// Sequential single-client measurement: wall clock around each call, one
// call at a time. query_ids are queried by id with the given k; then the
// upsert points are written. Throws when query_ids is empty.
BenchResult latency_bench(EngineClient& client, const std::vector<std::string>& query_ids,
                          std::size_t k, const std::vector<Point>& upserts);

struct SweepConfig {
  std::string corpus_path;
  lsh::LshScheme scheme;
  std::string model_path;
  // Cross product of the three retrieval grids, each optionally Top-K
  // pruned (an empty top_k grid means no pruning axis).
  std::vector<std::size_t> scann_nn{10};
  std::vector<std::size_t> idf_s{0};
  std::vector<double> filter_p{0.0};
  std::vector<std::size_t> top_k;
  // Baseline cells: bucket split sizes (0 = no split), same optional
  // pruning axis.
  std::vector<std::size_t> grale_bucket_s;
  std::vector<std::size_t> grale_top_k;
  std::uint64_t seed = 0;
  std::string out_dir;
  int parallelism = 1;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);

// One percentile curve CSV per cell plus manifest.json listing every cell
// with its edge total. Reruns with the same config are byte-identical.
void run_sweep(const SweepConfig& config);

}  // namespace gus::bench
