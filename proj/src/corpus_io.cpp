#include "gus/corpus_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace gus::io {

Point point_from_json(const nlohmann::json& j) {
  Point p;
  p.id = j.at("id").get<std::string>();
  if (p.id.empty()) throw std::runtime_error("point id must be non-empty");
  if (j.contains("dense")) {
    for (const auto& [field, values] : j.at("dense").items()) {
      p.dense.emplace(field, values.get<std::vector<double>>());
    }
  }
  if (j.contains("tokens")) {
    for (const auto& [field, values] : j.at("tokens").items()) {
      p.tokens.emplace(field, values.get<std::vector<std::string>>());
    }
  }
  return p;
}

nlohmann::json point_to_json(const Point& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["dense"] = nlohmann::json::object();
  for (const auto& [field, values] : p.dense) j["dense"][field] = values;
  j["tokens"] = nlohmann::json::object();
  for (const auto& [field, values] : p.tokens) j["tokens"][field] = values;
  return j;
}

std::vector<Point> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus: " + path);
  std::vector<Point> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      corpus.push_back(point_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed point record: " + e.what());
    }
  }
  return corpus;
}

void write_corpus(const std::vector<Point>& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write corpus: " + path);
  for (const Point& p : corpus) out << point_to_json(p).dump() << '\n';
}

std::vector<Point> dedupe_last_wins(std::vector<Point> corpus,
                                    std::size_t* duplicate_count) {
  std::unordered_map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < corpus.size(); ++i) last[corpus[i].id] = i;
  std::vector<Point> out;
  out.reserve(last.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (last.at(corpus[i].id) == i) out.push_back(std::move(corpus[i]));
  }
  if (duplicate_count != nullptr) *duplicate_count = corpus.size() - out.size();
  return out;
}

}  // namespace gus::io
