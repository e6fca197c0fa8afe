// gus: dynamic similarity-graph engine and its offline tooling.

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gus/baseline.hpp"
#include "gus/bench.hpp"
#include "gus/corpus_io.hpp"
#include "gus/engine.hpp"
#include "gus/preprocess.hpp"
#include "gus/rng.hpp"
#include "gus/scorer.hpp"
#include "gus/server.hpp"
#include "gus/synth.hpp"

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

gus::lsh::LshScheme load_scheme(const std::string& path) {
  return gus::lsh::scheme_from_json(read_json_file(path));
}

struct ServeConfig {
  gus::engine::EngineOptions engine;
  std::string host = "127.0.0.1";
  int port = 8080;
};

ServeConfig load_serve_config(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  ServeConfig config;
  config.engine.scheme = gus::lsh::scheme_from_json(j.at("scheme"));
  config.engine.default_k = j.value("default_k", std::size_t{10});
  if (j.contains("bundle")) config.engine.bundle_dir = j.at("bundle").get<std::string>();
  if (j.contains("corpus")) config.engine.corpus_path = j.at("corpus").get<std::string>();
  if (j.contains("model")) config.engine.model_path = j.at("model").get<std::string>();
  config.host = j.value("host", config.host);
  config.port = j.value("port", config.port);
  return config;
}

// Perturbed copies of existing points under fresh ids, used as the upsert
// load in the benchmark.
std::vector<gus::Point> make_upsert_points(const std::vector<gus::Point>& corpus,
                                           std::size_t count, std::uint64_t seed) {
  std::vector<gus::Point> out;
  if (corpus.empty()) return out;
  gus::rng::SplitMix64 gen(seed);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    gus::Point p = corpus[gen.bounded(corpus.size())];
    p.id = "bench_upsert_" + std::to_string(i);
    for (auto& [field, vec] : p.dense) {
      for (double& v : vec) v += 0.01 * (gen.uniform01() - 0.5);
    }
    out.push_back(std::move(p));
  }
  return out;
}

int run_lemma1(const std::string& corpus_path, const std::string& scheme_path,
               const std::string& weighting) {
  const auto corpus =
      gus::io::dedupe_last_wins(gus::io::read_corpus(corpus_path), nullptr);
  const auto scheme = load_scheme(scheme_path);
  const auto mode = weighting == "idf" ? gus::bench::Weighting::kIdf
                                       : gus::bench::Weighting::kUnit;
  const auto report = gus::bench::check_pair_equivalence(corpus, scheme, mode);
  std::cout << "points: " << corpus.size() << ", weighting: " << weighting
            << ", missing: " << report.missing.size()
            << ", extra: " << report.extra.size() << '\n';
  for (std::size_t i = 0; i < report.missing.size() && i < 5; ++i) {
    std::cout << "  missing pair: (" << report.missing[i].first << ", "
              << report.missing[i].second << ")\n";
  }
  for (std::size_t i = 0; i < report.extra.size() && i < 5; ++i) {
    std::cout << "  extra pair: (" << report.extra[i].first << ", "
              << report.extra[i].second << ")\n";
  }
  std::cout << (report.equal ? "EQUAL" : "NOT EQUAL") << '\n';
  return report.equal ? 0 : 1;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic similarity-graph engine"};
  app.require_subcommand(1);

  // ---- preprocess ----
  std::string pp_corpus, pp_scheme, pp_out, pp_model;
  std::size_t pp_idf_s = 0;
  double pp_filter_p = 0.0;
  std::uint64_t pp_timestamp = 0;
  bool pp_has_timestamp = false, pp_no_snapshot = false;
  auto* pp = app.add_subcommand("preprocess",
                                "build IDF/filter artifacts and an index snapshot");
  pp->add_option("--corpus", pp_corpus, "corpus JSON Lines file")->required();
  pp->add_option("--scheme", pp_scheme, "LSH scheme JSON file")->required();
  pp->add_option("--out", pp_out, "output bundle directory")->required();
  pp->add_option("--idf-s", pp_idf_s, "IDF table size limit (0 disables IDF)");
  pp->add_option("--filter-p", pp_filter_p, "percent of most popular buckets to drop");
  pp->add_option("--model", pp_model, "model weights to copy into the bundle");
  pp->add_option("--timestamp", pp_timestamp, "fixed manifest timestamp (unix seconds)")
      ->each([&](const std::string&) { pp_has_timestamp = true; });
  pp->add_flag("--no-snapshot", pp_no_snapshot, "skip writing the index snapshot");

  // ---- serve ----
  std::string sv_config;
  auto* sv = app.add_subcommand("serve", "run the HTTP engine");
  sv->add_option("--config", sv_config, "engine config JSON file")->required();

  // ---- build-graph ----
  std::string bg_corpus, bg_scheme, bg_model, bg_out;
  gus::bench::GraphParams bg_params;
  std::size_t bg_topk = 0;
  auto* bg = app.add_subcommand("build-graph", "offline batch run of the dynamic pipeline");
  bg->add_option("--corpus", bg_corpus)->required();
  bg->add_option("--scheme", bg_scheme)->required();
  bg->add_option("--model", bg_model)->required();
  bg->add_option("--out", bg_out, "edge CSV output")->required();
  bg->add_option("--nn", bg_params.scann_nn, "candidates per query (0 = all negative)");
  bg->add_option("--idf-s", bg_params.idf_size_limit);
  bg->add_option("--filter-p", bg_params.filter_percent);
  bg->add_option("--top-k", bg_topk, "post-prune to each point's top-k edges");

  // ---- grale-baseline ----
  std::string gb_corpus, gb_scheme, gb_model, gb_out;
  std::size_t gb_bucket_s = 0, gb_topk = 0;
  std::uint64_t gb_seed = 0;
  bool gb_require_both = false;
  auto* gb = app.add_subcommand("grale-baseline",
                                "batch bucket-pair graph (the Grale procedure)");
  gb->add_option("--corpus", gb_corpus)->required();
  gb->add_option("--scheme", gb_scheme)->required();
  gb->add_option("--model", gb_model)->required();
  gb->add_option("--out", gb_out, "edge CSV output")->required();
  gb->add_option("--bucket-s", gb_bucket_s, "max bucket size before random split (0 = none)");
  gb->add_option("--seed", gb_seed, "seed for bucket splitting");
  gb->add_option("--top-k", gb_topk, "post-prune to each point's top-k edges");
  gb->add_flag("--require-both", gb_require_both,
               "pruned edge survives only when both endpoints keep it");

  // ---- lemma1-check ----
  std::string l1_corpus, l1_scheme, l1_weighting = "unit";
  auto* l1 = app.add_subcommand(
      "lemma1-check",
      "verify bucket-sharing pairs == strict-negative threshold retrieval");
  l1->add_option("--corpus", l1_corpus)->required();
  l1->add_option("--scheme", l1_scheme)->required();
  l1->add_option("--weighting", l1_weighting)
      ->check(CLI::IsMember({"unit", "idf"}));

  // ---- curve ----
  std::string cv_edges, cv_out;
  auto* cv = app.add_subcommand("curve", "percentile curve of an edge CSV");
  cv->add_option("--edges", cv_edges)->required();
  cv->add_option("--out", cv_out)->required();

  // ---- bench ----
  std::string bn_config, bn_url, bn_corpus, bn_out;
  std::size_t bn_queries = 1000, bn_upserts = 1000, bn_k = 10;
  std::uint64_t bn_seed = 7;
  auto* bn = app.add_subcommand("bench", "sequential latency measurement");
  bn->add_option("--config", bn_config, "engine config (in-process mode)");
  bn->add_option("--url", bn_url, "host:port of a served engine (remote mode)");
  bn->add_option("--corpus", bn_corpus, "corpus to sample query ids from");
  bn->add_option("--queries", bn_queries, "number of neighbor queries");
  bn->add_option("--upserts", bn_upserts, "number of upserts");
  bn->add_option("--k", bn_k, "neighbors per query");
  bn->add_option("--seed", bn_seed);
  bn->add_option("--out", bn_out, "write the JSON report here");

  // ---- sweep ----
  std::string sw_config;
  int sw_parallel = 0;
  auto* sw = app.add_subcommand("sweep", "parameter grid of build-graph/grale cells");
  sw->add_option("--config", sw_config, "sweep config JSON")->required();
  sw->add_option("--parallel", sw_parallel, "worker threads across cells");

  // ---- make-corpus ----
  std::string mc_out, mc_config;
  gus::synth::SynthConfig mc;
  auto* mcs = app.add_subcommand("make-corpus", "seeded synthetic corpus generator");
  mcs->add_option("--out", mc_out)->required();
  mcs->add_option("--config", mc_config, "synth config JSON (flags override)");
  mcs->add_option("--count", mc.count);
  mcs->add_option("--seed", mc.seed);
  mcs->add_option("--dense-dim", mc.dense_dim);
  mcs->add_option("--clusters", mc.clusters);

  // ---- convert ----
  std::string cnv_out, cnv_prefix = "n";
  std::vector<std::string> cnv_dense, cnv_tokens;
  auto* cnv = app.add_subcommand(
      "convert", "CSV node-feature files (one row per node) to corpus JSON Lines");
  cnv->add_option("--out", cnv_out)->required();
  cnv->add_option("--dense", cnv_dense,
                  "field=csv with comma-separated floats per row (repeatable)");
  cnv->add_option("--tokens", cnv_tokens,
                  "field=csv with comma-separated tokens per row (repeatable)");
  cnv->add_option("--id-prefix", cnv_prefix, "node ids become <prefix><row>");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pp) {
      gus::preprocess::Options options;
      options.idf_size_limit = pp_idf_s;
      options.filter_percent = pp_filter_p;
      options.write_snapshot = !pp_no_snapshot;
      if (!pp_model.empty()) options.model_path = pp_model;
      if (pp_has_timestamp) options.timestamp = pp_timestamp;
      const auto bundle = gus::preprocess::run_to_dir(pp_corpus, load_scheme(pp_scheme),
                                                      options, pp_out);
      std::cout << "bundle written to " << pp_out << " (" << bundle.manifest.corpus_size
                << " points, " << bundle.manifest.total_buckets << " buckets, "
                << bundle.manifest.duplicate_records << " duplicate records)\n";
    } else if (*sv) {
      ServeConfig config = load_serve_config(sv_config);
      gus::engine::Engine engine(std::move(config.engine));
      gus::server::Server server(engine);
      std::cout << "serving " << engine.size() << " points on " << config.host << ':'
                << config.port << '\n';
      server.run(config.host, config.port);
    } else if (*bg) {
      if (bg_topk > 0) bg_params.top_k = bg_topk;
      const auto corpus =
          gus::io::dedupe_last_wins(gus::io::read_corpus(bg_corpus), nullptr);
      const auto edges = gus::bench::offline_graph(
          corpus, load_scheme(bg_scheme), gus::scorer::load_weights(bg_model), bg_params);
      gus::baseline::write_edges_csv(edges, bg_out);
      std::cout << edges.size() << " edges -> " << bg_out << '\n';
    } else if (*gb) {
      const auto corpus =
          gus::io::dedupe_last_wins(gus::io::read_corpus(gb_corpus), nullptr);
      const auto pairs = gus::baseline::grale_pairs(
          corpus, load_scheme(gb_scheme),
          gb_bucket_s == 0 ? std::nullopt : std::optional<std::size_t>(gb_bucket_s),
          gb_seed);
      auto edges =
          gus::baseline::score_pairs(pairs, corpus, gus::scorer::load_weights(gb_model));
      if (gb_topk > 0) edges = gus::baseline::topk_prune(edges, gb_topk, gb_require_both);
      gus::baseline::write_edges_csv(edges, gb_out);
      std::cout << edges.size() << " edges -> " << gb_out << '\n';
    } else if (*l1) {
      return run_lemma1(l1_corpus, l1_scheme, l1_weighting);
    } else if (*cv) {
      const auto curve =
          gus::bench::percentile_curve(gus::baseline::read_edges_csv(cv_edges));
      gus::bench::write_curve_csv(curve, cv_out);
      std::cout << "total_edges " << curve.total_edges << " -> " << cv_out << '\n';
    } else if (*bn) {
      if (bn_corpus.empty()) throw std::runtime_error("bench needs --corpus");
      const auto corpus =
          gus::io::dedupe_last_wins(gus::io::read_corpus(bn_corpus), nullptr);
      if (corpus.empty()) throw std::runtime_error("bench corpus has no points");
      gus::rng::SplitMix64 gen(bn_seed);
      std::vector<std::string> query_ids;
      query_ids.reserve(bn_queries);
      for (std::size_t i = 0; i < bn_queries; ++i) {
        query_ids.push_back(corpus[gen.bounded(corpus.size())].id);
      }
      const auto upserts = make_upsert_points(corpus, bn_upserts, bn_seed + 1);

      gus::bench::BenchResult result;
      if (!bn_url.empty()) {
        const auto colon = bn_url.rfind(':');
        if (colon == std::string::npos) throw std::runtime_error("--url must be host:port");
        gus::server::HttpEngineClient client(bn_url.substr(0, colon),
                                             std::stoi(bn_url.substr(colon + 1)));
        result = gus::bench::latency_bench(client, query_ids, bn_k, upserts);
      } else if (!bn_config.empty()) {
        ServeConfig config = load_serve_config(bn_config);
        gus::engine::Engine engine(std::move(config.engine));
        gus::bench::LocalEngineClient client(engine);
        result = gus::bench::latency_bench(client, query_ids, bn_k, upserts);
      } else {
        throw std::runtime_error("bench needs --config or --url");
      }
      const nlohmann::json report = {
          {"query", gus::bench::latency_report_to_json(result.query)},
          {"upsert", gus::bench::latency_report_to_json(result.upsert)}};
      std::cout << report.dump(2) << '\n';
      if (!bn_out.empty()) {
        std::ofstream out(bn_out, std::ios::binary | std::ios::trunc);
        out << report.dump(2) << '\n';
      }
    } else if (*sw) {
      auto config = gus::bench::sweep_config_from_json(read_json_file(sw_config));
      if (sw_parallel > 0) config.parallelism = sw_parallel;
      gus::bench::run_sweep(config);
      std::cout << "sweep written to " << config.out_dir << '\n';
    } else if (*mcs) {
      if (!mc_config.empty()) {
        auto from_file = gus::synth::synth_config_from_json(read_json_file(mc_config));
        if (mcs->count("--count") == 0) mc.count = from_file.count;
        if (mcs->count("--seed") == 0) mc.seed = from_file.seed;
        if (mcs->count("--dense-dim") == 0) mc.dense_dim = from_file.dense_dim;
        if (mcs->count("--clusters") == 0) mc.clusters = from_file.clusters;
        mc.noise = from_file.noise;
        mc.global_pool = from_file.global_pool;
        mc.tags_per_point = from_file.tags_per_point;
        mc.cluster_tags = from_file.cluster_tags;
      }
      gus::io::write_corpus(gus::synth::make_corpus(mc), mc_out);
      std::cout << mc.count << " points -> " << mc_out << '\n';
    } else if (*cnv) {
      std::vector<gus::Point> corpus;
      auto split_arg = [](const std::string& arg) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
          throw std::runtime_error("expected field=path, got " + arg);
        }
        return std::make_pair(arg.substr(0, eq), arg.substr(eq + 1));
      };
      auto ensure_size = [&](std::size_t n) {
        while (corpus.size() < n) {
          gus::Point p;
          p.id = cnv_prefix + std::to_string(corpus.size());
          corpus.push_back(std::move(p));
        }
      };
      for (const std::string& arg : cnv_dense) {
        const auto [field, path] = split_arg(arg);
        const auto rows = read_csv_rows(path);
        ensure_size(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          std::vector<double> vec;
          vec.reserve(rows[i].size());
          for (const std::string& cell : rows[i]) vec.push_back(std::stod(cell));
          corpus[i].dense[field] = std::move(vec);
        }
      }
      for (const std::string& arg : cnv_tokens) {
        const auto [field, path] = split_arg(arg);
        const auto rows = read_csv_rows(path);
        ensure_size(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          std::vector<std::string> toks;
          for (const std::string& cell : rows[i]) {
            if (!cell.empty()) toks.push_back(cell);
          }
          corpus[i].tokens[field] = std::move(toks);
        }
      }
      gus::io::write_corpus(corpus, cnv_out);
      std::cout << corpus.size() << " points -> " << cnv_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
