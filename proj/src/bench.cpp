#include "gus/bench.hpp"

#include <nlohmann/json.hpp>

#include <sys/resource.h>
#include <time.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gus/corpus_io.hpp"
#include "gus/embedding.hpp"
#include "gus/preprocess.hpp"
#include "gus/sparse_index.hpp"

namespace gus::bench {

namespace {

// Strictly negative, smaller in magnitude than any achievable dot product
// of floored weights; dist <= kStrictNegative is equivalent to dist < 0.
constexpr double kStrictNegative = -std::numeric_limits<double>::min();

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::set<baseline::ScoringPair> retrieval_pairs(const idx::SparseIndex& index,
                                                const std::vector<std::string>& ids,
                                                std::size_t scann_nn) {
  std::set<baseline::ScoringPair> pairs;
  for (const std::string& id : ids) {
    const auto embedding = index.embedding_of(id);
    const std::vector<idx::Hit> hits =
        scann_nn == 0 ? index.query_threshold(*embedding, kStrictNegative, &id)
                      : index.query_topk(*embedding, scann_nn, &id);
    for (const idx::Hit& hit : hits) {
      pairs.insert(baseline::make_pair_canonical(id, hit.id));
    }
  }
  return pairs;
}

double wall_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

double cpu_ms_now() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) * 1e3 + static_cast<double>(ts.tv_nsec) / 1e6;
}

double max_rss_mib() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
}

double nearest_rank(const std::vector<double>& ascending, double p) {
  if (ascending.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(ascending.size())));
  return ascending[rank == 0 ? 0 : rank - 1];
}

LatencyReport report_from_samples(std::vector<double> wall_ms_samples,
                                  double total_cpu_ms) {
  LatencyReport report;
  report.samples = wall_ms_samples.size();
  std::sort(wall_ms_samples.begin(), wall_ms_samples.end());
  report.p50_ms = nearest_rank(wall_ms_samples, 50);
  report.p95_ms = nearest_rank(wall_ms_samples, 95);
  report.p99_ms = nearest_rank(wall_ms_samples, 99);
  report.mean_cpu_ms =
      report.samples == 0 ? 0.0 : total_cpu_ms / static_cast<double>(report.samples);
  report.max_rss_mib = max_rss_mib();
  return report;
}

}  // namespace

std::vector<baseline::WeightedEdge> offline_graph(const std::vector<Point>& corpus,
                                                  const lsh::LshScheme& scheme,
                                                  const scorer::ModelWeights& model,
                                                  const GraphParams& params) {
  idx::SparseIndex index;
  preprocess::Options options;
  options.idf_size_limit = params.idf_size_limit;
  options.filter_percent = params.filter_percent;
  options.write_snapshot = false;
  const preprocess::Result prepared = preprocess::run(corpus, scheme, options, index);

  const std::set<baseline::ScoringPair> pairs =
      retrieval_pairs(index, index.ids_sorted(), params.scann_nn);
  std::vector<baseline::WeightedEdge> edges =
      baseline::score_pairs(pairs, prepared.corpus, model);
  if (params.top_k) edges = baseline::topk_prune(edges, *params.top_k);
  return edges;
}

PercentileCurve percentile_curve(const std::vector<baseline::WeightedEdge>& edges) {
  PercentileCurve curve;
  curve.total_edges = edges.size();
  if (edges.empty()) return curve;

  std::vector<double> weights;
  weights.reserve(edges.size());
  for (const auto& e : edges) weights.push_back(e.weight);
  std::sort(weights.begin(), weights.end(), std::greater<>());

  curve.rows.reserve(101);
  const std::size_t n = weights.size();
  for (int p = 0; p <= 100; ++p) {
    const std::size_t index =
        std::min(n - 1, static_cast<std::size_t>(p) * n / 100);
    curve.rows.push_back({p, weights[index]});
  }
  return curve;
}

void write_curve_csv(const PercentileCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write curve: " + path);
  out << "percentile,edge_weight\n";
  for (const auto& row : curve.rows) {
    out << row.percentile << ',' << format_double(row.edge_weight) << '\n';
  }
}

PairEquivalenceReport check_pair_equivalence(const std::vector<Point>& corpus,
                                             const lsh::LshScheme& scheme,
                                             Weighting weighting) {
  const std::set<baseline::ScoringPair> bucket_pairs =
      baseline::grale_pairs(corpus, scheme, std::nullopt, 0);

  const auto stats = lsh::bucket_stats(corpus, scheme);
  // Full-size table: every bucket stored, nothing clamped away.
  const emb::IdfTable idf =
      weighting == Weighting::kIdf
          ? emb::build_idf_table(stats, corpus.size(), std::max<std::size_t>(stats.size(), 1))
          : emb::IdfTable{};
  const emb::FilterSet no_filter;

  const lsh::Bucketizer bucketizer(scheme);
  idx::SparseIndex index;
  for (const Point& p : corpus) {
    index.upsert(p.id, emb::embed(bucketizer.buckets(p), idf, no_filter));
  }
  const std::set<baseline::ScoringPair> retrieved =
      retrieval_pairs(index, index.ids_sorted(), 0);

  PairEquivalenceReport report;
  std::set_difference(bucket_pairs.begin(), bucket_pairs.end(), retrieved.begin(),
                      retrieved.end(), std::back_inserter(report.missing));
  std::set_difference(retrieved.begin(), retrieved.end(), bucket_pairs.begin(),
                      bucket_pairs.end(), std::back_inserter(report.extra));
  report.equal = report.missing.empty() && report.extra.empty();
  return report;
}

nlohmann::json latency_report_to_json(const LatencyReport& report) {
  return {{"p50_ms", report.p50_ms},     {"p95_ms", report.p95_ms},
          {"p99_ms", report.p99_ms},     {"samples", report.samples},
          {"mean_cpu_ms", report.mean_cpu_ms}, {"max_rss_mib", report.max_rss_mib}};
}

engine::Neighborhood LocalEngineClient::neighbors(const engine::NeighborsRequest& request) {
  return engine_.neighbors(request);
}

bool LocalEngineClient::upsert(const Point& p) { return engine_.upsert(p); }

BenchResult latency_bench(EngineClient& client, const std::vector<std::string>& query_ids,
                          std::size_t k, const std::vector<Point>& upserts) {
  if (query_ids.empty()) {
    throw std::invalid_argument("latency bench needs at least one query id");
  }

  BenchResult result;
  {
    std::vector<double> samples;
    samples.reserve(query_ids.size());
    const double cpu_before = cpu_ms_now();
    for (const std::string& id : query_ids) {
      engine::NeighborsRequest request;
      request.id = id;
      request.k = k;
      const auto start = std::chrono::steady_clock::now();
      client.neighbors(request);
      samples.push_back(wall_ms(start));
    }
    result.query = report_from_samples(std::move(samples), cpu_ms_now() - cpu_before);
  }
  {
    std::vector<double> samples;
    samples.reserve(upserts.size());
    const double cpu_before = cpu_ms_now();
    for (const Point& p : upserts) {
      const auto start = std::chrono::steady_clock::now();
      client.upsert(p);
      samples.push_back(wall_ms(start));
    }
    result.upsert = report_from_samples(std::move(samples), cpu_ms_now() - cpu_before);
  }
  return result;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig config;
  config.corpus_path = j.at("corpus").get<std::string>();
  config.scheme = lsh::scheme_from_json(j.at("scheme"));
  config.model_path = j.at("model").get<std::string>();
  if (j.contains("scann_nn")) config.scann_nn = j.at("scann_nn").get<std::vector<std::size_t>>();
  if (j.contains("idf_s")) config.idf_s = j.at("idf_s").get<std::vector<std::size_t>>();
  if (j.contains("filter_p")) config.filter_p = j.at("filter_p").get<std::vector<double>>();
  if (j.contains("top_k")) config.top_k = j.at("top_k").get<std::vector<std::size_t>>();
  if (j.contains("grale_bucket_s")) {
    config.grale_bucket_s = j.at("grale_bucket_s").get<std::vector<std::size_t>>();
  }
  if (j.contains("grale_top_k")) {
    config.grale_top_k = j.at("grale_top_k").get<std::vector<std::size_t>>();
  }
  config.seed = j.value("seed", std::uint64_t{0});
  config.out_dir = j.at("out_dir").get<std::string>();
  config.parallelism = j.value("parallelism", 1);
  return config;
}

namespace {

struct SweepCell {
  nlohmann::json params;
  std::string file;
  std::function<std::vector<baseline::WeightedEdge>()> build;
};

}  // namespace

void run_sweep(const SweepConfig& config) {
  const std::vector<Point> corpus =
      io::dedupe_last_wins(io::read_corpus(config.corpus_path), nullptr);
  const scorer::ModelWeights model = scorer::load_weights(config.model_path);

  std::vector<SweepCell> cells;
  const std::vector<std::optional<std::size_t>> gus_topk = [&] {
    std::vector<std::optional<std::size_t>> axis;
    if (config.top_k.empty()) {
      axis.push_back(std::nullopt);
    } else {
      for (const std::size_t k : config.top_k) axis.push_back(k);
    }
    return axis;
  }();
  for (const std::size_t nn : config.scann_nn) {
    for (const std::size_t idf_s : config.idf_s) {
      for (const double filter_p : config.filter_p) {
        for (const auto& top_k : gus_topk) {
          GraphParams params{nn, idf_s, filter_p, top_k};
          std::string file = "gus_nn" + std::to_string(nn) + "_idfs" +
                             std::to_string(idf_s) + "_filterp" + format_double(filter_p);
          if (top_k) file += "_topk" + std::to_string(*top_k);
          file += ".csv";
          nlohmann::json meta = {{"algo", "gus"},
                                 {"scann_nn", nn},
                                 {"idf_s", idf_s},
                                 {"filter_p", filter_p},
                                 {"top_k", top_k ? nlohmann::json(*top_k) : nlohmann::json()}};
          cells.push_back({std::move(meta), std::move(file), [&corpus, &model, params, &config] {
                             return offline_graph(corpus, config.scheme, model, params);
                           }});
        }
      }
    }
  }
  const std::vector<std::optional<std::size_t>> grale_topk = [&] {
    std::vector<std::optional<std::size_t>> axis;
    if (config.grale_top_k.empty()) {
      axis.push_back(std::nullopt);
    } else {
      for (const std::size_t k : config.grale_top_k) axis.push_back(k);
    }
    return axis;
  }();
  for (const std::size_t bucket_s : config.grale_bucket_s) {
    for (const auto& top_k : grale_topk) {
      std::string file = "grale_buckets" + std::to_string(bucket_s);
      if (top_k) file += "_topk" + std::to_string(*top_k);
      file += ".csv";
      nlohmann::json meta = {{"algo", "grale"},
                             {"bucket_s", bucket_s},
                             {"top_k", top_k ? nlohmann::json(*top_k) : nlohmann::json()}};
      cells.push_back({std::move(meta), std::move(file),
                       [&corpus, &model, bucket_s, top_k, &config] {
                         const auto pairs = baseline::grale_pairs(
                             corpus, config.scheme,
                             bucket_s == 0 ? std::nullopt
                                           : std::optional<std::size_t>(bucket_s),
                             config.seed);
                         auto edges = baseline::score_pairs(pairs, corpus, model);
                         if (top_k) edges = baseline::topk_prune(edges, *top_k);
                         return edges;
                       }});
    }
  }

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path dir(config.out_dir);

  std::vector<std::size_t> totals(cells.size(), 0);
  const int workers = std::max(1, config.parallelism);
  std::size_t next_cell = 0;
  std::mutex next_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(next_mutex);
        if (next_cell >= cells.size()) return;
        i = next_cell++;
      }
      const auto edges = cells[i].build();
      const PercentileCurve curve = percentile_curve(edges);
      write_curve_csv(curve, (dir / cells[i].file).string());
      totals[i] = curve.total_edges;
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  nlohmann::json manifest_cells = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    nlohmann::json cell = cells[i].params;
    cell["file"] = cells[i].file;
    cell["edges"] = totals[i];
    manifest_cells.push_back(std::move(cell));
  }
  const nlohmann::json manifest = {{"seed", config.seed},
                                   {"corpus", config.corpus_path},
                                   {"cells", std::move(manifest_cells)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write sweep manifest");
  out << manifest.dump(2) << '\n';
}

}  // namespace gus::bench
