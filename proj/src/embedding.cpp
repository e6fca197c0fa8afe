#include "gus/embedding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gus::emb {

SparseEmbedding SparseEmbedding::from_pairs(
    std::vector<std::pair<BucketId, double>> entries) {
  std::sort(entries.begin(), entries.end());
  SparseEmbedding e;
  e.dims.reserve(entries.size());
  e.weights.reserve(entries.size());
  for (const auto& [dim, w] : entries) {
    if (w <= 0.0) {
      throw std::invalid_argument("embedding weight must be > 0");
    }
    if (!e.dims.empty() && e.dims.back() == dim) {
      throw std::invalid_argument("duplicate embedding dimension");
    }
    e.dims.push_back(dim);
    e.weights.push_back(w);
  }
  return e;
}

bool SparseEmbedding::is_canonical() const {
  if (dims.size() != weights.size()) return false;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (weights[i] <= 0.0) return false;
    if (i > 0 && dims[i - 1] >= dims[i]) return false;
  }
  return true;
}

double SparseEmbedding::norm_squared() const {
  double sum = 0.0;
  for (const double w : weights) sum += w * w;
  return sum;
}

double dist(const SparseEmbedding& a, const SparseEmbedding& b) {
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.dims.size() && j < b.dims.size()) {
    if (a.dims[i] < b.dims[j]) {
      ++i;
    } else if (a.dims[i] > b.dims[j]) {
      ++j;
    } else {
      dot += a.weights[i] * b.weights[j];
      ++i;
      ++j;
    }
  }
  return -dot;
}

double idf_lookup(BucketId b, const IdfTable& idf) {
  if (!idf.enabled()) {
    throw std::logic_error("idf_lookup on a disabled table");
  }
  const auto it = idf.stored.find(b);
  return it != idf.stored.end() ? it->second : idf.clamp_weight;
}

IdfTable build_idf_table(const std::unordered_map<BucketId, std::uint64_t>& stats,
                         std::uint64_t total, std::size_t size_limit) {
  IdfTable table;
  table.total_points = total;
  table.size_limit = size_limit;
  if (size_limit == 0) return table;

  std::vector<std::pair<double, BucketId>> weighted;
  weighted.reserve(stats.size());
  for (const auto& [bucket, count] : stats) {
    if (count == 0 || count > total) {
      throw std::invalid_argument("bucket count must be in [1, total]");
    }
    const double w =
        std::max(std::log(static_cast<double>(total) / static_cast<double>(count)),
                 kWeightFloor);
    weighted.emplace_back(w, bucket);
  }
  std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (weighted.size() > size_limit) weighted.resize(size_limit);

  table.clamp_weight = weighted.empty() ? kWeightFloor : weighted.back().first;
  table.stored.reserve(weighted.size());
  for (const auto& [w, bucket] : weighted) table.stored.emplace(bucket, w);
  return table;
}

FilterSet build_filter_set(const std::unordered_map<BucketId, std::uint64_t>& stats,
                           double percent) {
  if (percent < 0.0 || percent > 100.0) {
    throw std::invalid_argument("filter percent must be in [0, 100]");
  }
  FilterSet filter;
  filter.percent = percent;
  const auto excluded_count = static_cast<std::size_t>(
      std::ceil(percent / 100.0 * static_cast<double>(stats.size())));
  if (excluded_count == 0) return filter;

  std::vector<std::pair<std::uint64_t, BucketId>> by_count;
  by_count.reserve(stats.size());
  for (const auto& [bucket, count] : stats) by_count.emplace_back(count, bucket);
  std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  filter.excluded.reserve(excluded_count);
  for (std::size_t i = 0; i < excluded_count && i < by_count.size(); ++i) {
    filter.excluded.insert(by_count[i].second);
  }
  return filter;
}

SparseEmbedding embed(const std::set<BucketId>& buckets, const IdfTable& idf,
                      const FilterSet& filter) {
  SparseEmbedding e;
  e.dims.reserve(buckets.size());
  // std::set iterates in ascending order, so the result is born canonical.
  for (const BucketId b : buckets) {
    if (filter.contains(b)) continue;
    e.dims.push_back(b);
    e.weights.push_back(idf.enabled() ? idf_lookup(b, idf) : 1.0);
  }
  return e;
}

nlohmann::json idf_to_json(const IdfTable& idf) {
  nlohmann::json stored = nlohmann::json::array();
  std::vector<BucketId> keys;
  keys.reserve(idf.stored.size());
  for (const auto& [bucket, _] : idf.stored) keys.push_back(bucket);
  std::sort(keys.begin(), keys.end());
  for (const BucketId b : keys) {
    stored.push_back(nlohmann::json::array({b, idf.stored.at(b)}));
  }
  return {{"total", idf.total_points},
          {"clamp", idf.clamp_weight},
          {"stored", std::move(stored)}};
}

IdfTable idf_from_json(const nlohmann::json& j, std::size_t size_limit) {
  IdfTable idf;
  idf.total_points = j.at("total").get<std::uint64_t>();
  idf.clamp_weight = j.at("clamp").get<double>();
  idf.size_limit = size_limit;
  for (const auto& entry : j.at("stored")) {
    idf.stored.emplace(entry.at(0).get<BucketId>(), entry.at(1).get<double>());
  }
  if (idf.stored.size() > size_limit) {
    throw std::runtime_error("idf table larger than its declared size limit");
  }
  return idf;
}

nlohmann::json filter_to_json(const FilterSet& filter) {
  std::vector<BucketId> excluded(filter.excluded.begin(), filter.excluded.end());
  std::sort(excluded.begin(), excluded.end());
  return {{"percent", filter.percent}, {"excluded", std::move(excluded)}};
}

FilterSet filter_from_json(const nlohmann::json& j) {
  FilterSet filter;
  filter.percent = j.at("percent").get<double>();
  for (const auto& b : j.at("excluded")) {
    filter.excluded.insert(b.get<BucketId>());
  }
  return filter;
}

}  // namespace gus::emb
