#include "gus/artifacts.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gus::artifacts {

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

void save_manifest(const Manifest& m, const std::string& path) {
  nlohmann::json j = {{"corpus_size", m.corpus_size},
                      {"scheme_hash", m.scheme_hash},
                      {"created_at", m.created_at},
                      {"idf_s", m.idf_size_limit},
                      {"filter_p", m.filter_percent},
                      {"duplicates", m.duplicate_records},
                      {"total_buckets", m.total_buckets}};
  if (m.snapshot_file) j["snapshot"] = *m.snapshot_file;
  if (m.model_file) j["model"] = *m.model_file;
  write_json(j, path);
}

Manifest load_manifest(const std::string& path) {
  const nlohmann::json j = read_json(path);
  Manifest m;
  try {
    m.corpus_size = j.at("corpus_size").get<std::uint64_t>();
    m.scheme_hash = j.at("scheme_hash").get<std::uint64_t>();
    m.created_at = j.at("created_at").get<std::uint64_t>();
    m.idf_size_limit = j.at("idf_s").get<std::size_t>();
    m.filter_percent = j.at("filter_p").get<double>();
    m.duplicate_records = j.value("duplicates", std::uint64_t{0});
    m.total_buckets = j.value("total_buckets", std::uint64_t{0});
    if (j.contains("snapshot")) m.snapshot_file = j.at("snapshot").get<std::string>();
    if (j.contains("model")) m.model_file = j.at("model").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest schema error in " + path + ": " + e.what());
  }
  return m;
}

void save_bundle(const ArtifactBundle& bundle) {
  std::filesystem::create_directories(bundle.dir);
  const std::filesystem::path dir(bundle.dir);
  write_json(emb::idf_to_json(bundle.idf), (dir / "idf.json").string());
  write_json(emb::filter_to_json(bundle.filter), (dir / "filter.json").string());
  save_manifest(bundle.manifest, (dir / "manifest.json").string());
}

ArtifactBundle load_bundle(const std::string& dir) {
  const std::filesystem::path path(dir);
  ArtifactBundle bundle;
  bundle.dir = dir;
  bundle.manifest = load_manifest((path / "manifest.json").string());
  try {
    bundle.idf = emb::idf_from_json(read_json((path / "idf.json").string()),
                                    bundle.manifest.idf_size_limit);
    bundle.filter = emb::filter_from_json(read_json((path / "filter.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("artifact schema error under " + dir + ": " + e.what());
  }
  if (bundle.filter.percent != bundle.manifest.filter_percent) {
    throw std::runtime_error("filter.json percent disagrees with manifest in " + dir);
  }
  return bundle;
}

std::uint64_t resolve_timestamp(std::optional<std::uint64_t> override_value) {
  if (override_value) return *override_value;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
  }
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
}

}  // namespace gus::artifacts
