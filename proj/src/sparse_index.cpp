#include "gus/sparse_index.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace gus::idx {

namespace {

struct Candidate {
  double dist;
  std::uint32_t slot;
};

}  // namespace

bool SparseIndex::upsert(const std::string& id, SparseEmbedding embedding) {
  if (id.empty()) throw std::invalid_argument("point id must be non-empty");
  if (!embedding.is_canonical()) {
    throw std::invalid_argument("embedding for '" + id + "' is not canonical");
  }
  std::unique_lock lock(mutex_);
  return upsert_locked(id, std::move(embedding));
}

bool SparseIndex::upsert_locked(const std::string& id, SparseEmbedding embedding) {
  const auto it = id_to_slot_.find(id);
  if (it != id_to_slot_.end()) {
    const std::uint32_t slot = it->second;
    remove_postings_locked(slot, embeddings_[slot]);
    embeddings_[slot] = std::move(embedding);
    insert_postings_locked(slot, embeddings_[slot]);
    return true;
  }
  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
    slot_to_id_[slot] = id;
    embeddings_[slot] = std::move(embedding);
  } else {
    slot = static_cast<std::uint32_t>(slot_to_id_.size());
    slot_to_id_.push_back(id);
    embeddings_.push_back(std::move(embedding));
  }
  id_to_slot_.emplace(id, slot);
  insert_postings_locked(slot, embeddings_[slot]);
  return false;
}

bool SparseIndex::remove(const std::string& id) {
  std::unique_lock lock(mutex_);
  const auto it = id_to_slot_.find(id);
  if (it == id_to_slot_.end()) return false;
  const std::uint32_t slot = it->second;
  remove_postings_locked(slot, embeddings_[slot]);
  embeddings_[slot] = SparseEmbedding{};
  slot_to_id_[slot].clear();
  free_slots_.push_back(slot);
  id_to_slot_.erase(it);
  return true;
}

void SparseIndex::clear() {
  std::unique_lock lock(mutex_);
  id_to_slot_.clear();
  slot_to_id_.clear();
  embeddings_.clear();
  free_slots_.clear();
  postings_.clear();
}

void SparseIndex::remove_postings_locked(std::uint32_t slot,
                                         const SparseEmbedding& embedding) {
  const std::string& id = slot_to_id_[slot];
  for (const BucketId dim : embedding.dims) {
    const auto it = postings_.find(dim);
    if (it == postings_.end()) continue;
    auto& list = it->second;
    const auto pos = std::lower_bound(
        list.begin(), list.end(), id,
        [this](const Posting& p, const std::string& v) { return slot_to_id_[p.slot] < v; });
    if (pos != list.end() && pos->slot == slot) list.erase(pos);
    if (list.empty()) postings_.erase(it);
  }
}

void SparseIndex::insert_postings_locked(std::uint32_t slot,
                                         const SparseEmbedding& embedding) {
  const std::string& id = slot_to_id_[slot];
  for (std::size_t i = 0; i < embedding.dims.size(); ++i) {
    auto& list = postings_[embedding.dims[i]];
    const auto pos = std::lower_bound(
        list.begin(), list.end(), id,
        [this](const Posting& p, const std::string& v) { return slot_to_id_[p.slot] < v; });
    list.insert(pos, Posting{slot, embedding.weights[i]});
  }
}

std::vector<Hit> SparseIndex::collect_locked(const SparseEmbedding& query, double tau,
                                             bool include_zero,
                                             const std::string* exclude_id) const {
  std::uint32_t exclude_slot = kFreeSlot;
  if (exclude_id != nullptr) {
    const auto it = id_to_slot_.find(*exclude_id);
    if (it != id_to_slot_.end()) exclude_slot = it->second;
  }

  // Scores accumulate per candidate in ascending dimension order, matching
  // the merge-join evaluation of dist() bit for bit.
  std::vector<double> acc(slot_to_id_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (std::size_t i = 0; i < query.dims.size(); ++i) {
    const auto it = postings_.find(query.dims[i]);
    if (it == postings_.end()) continue;
    const double qw = query.weights[i];
    for (const Posting& p : it->second) {
      if (acc[p.slot] == 0.0) touched.push_back(p.slot);
      acc[p.slot] += qw * p.weight;
    }
  }

  std::vector<Candidate> candidates;
  candidates.reserve(touched.size());
  for (const std::uint32_t slot : touched) {
    // acc can underflow back to zero for denormal weights; such points are
    // indistinguishable from zero-overlap ones and take that path instead.
    if (acc[slot] <= 0.0) continue;
    if (slot == exclude_slot) continue;
    const double d = -acc[slot];
    if (d <= tau) candidates.push_back({d, slot});
  }
  if (include_zero && tau >= 0.0) {
    for (const auto& [id, slot] : id_to_slot_) {
      if (acc[slot] > 0.0 || slot == exclude_slot) continue;
      candidates.push_back({0.0, slot});
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [this](const Candidate& a, const Candidate& b) {
              if (a.dist != b.dist) return a.dist < b.dist;
              return slot_to_id_[a.slot] < slot_to_id_[b.slot];
            });

  std::vector<Hit> hits;
  hits.reserve(candidates.size());
  for (const Candidate& c : candidates) hits.push_back({slot_to_id_[c.slot], c.dist});
  return hits;
}

std::vector<Hit> SparseIndex::query_topk(const SparseEmbedding& query, std::size_t k,
                                         const std::string* exclude_id) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (!query.is_canonical()) throw std::invalid_argument("query embedding not canonical");
  std::shared_lock lock(mutex_);
  // Every accumulated candidate has dist < 0, so tau = 0 keeps them all.
  std::vector<Hit> hits = collect_locked(query, 0.0, /*include_zero=*/false, exclude_id);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<Hit> SparseIndex::query_threshold(const SparseEmbedding& query, double tau,
                                              const std::string* exclude_id) const {
  if (!query.is_canonical()) throw std::invalid_argument("query embedding not canonical");
  std::shared_lock lock(mutex_);
  return collect_locked(query, tau, /*include_zero=*/true, exclude_id);
}

std::size_t SparseIndex::size() const {
  std::shared_lock lock(mutex_);
  return id_to_slot_.size();
}

bool SparseIndex::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return id_to_slot_.count(id) > 0;
}

std::optional<SparseEmbedding> SparseIndex::embedding_of(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = id_to_slot_.find(id);
  if (it == id_to_slot_.end()) return std::nullopt;
  return embeddings_[it->second];
}

std::size_t SparseIndex::dimension_count() const {
  std::shared_lock lock(mutex_);
  return postings_.size();
}

std::size_t SparseIndex::posting_count() const {
  std::shared_lock lock(mutex_);
  std::size_t total = 0;
  for (const auto& [_, list] : postings_) total += list.size();
  return total;
}

std::vector<std::string> SparseIndex::ids_sorted() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  ids.reserve(id_to_slot_.size());
  for (const auto& [id, _] : id_to_slot_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void SparseIndex::save_snapshot(const std::string& path) const {
  nlohmann::json points = nlohmann::json::array();
  {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    ids.reserve(id_to_slot_.size());
    for (const auto& [id, _] : id_to_slot_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const std::string& id : ids) {
      const SparseEmbedding& e = embeddings_[id_to_slot_.at(id)];
      nlohmann::json entries = nlohmann::json::array();
      for (std::size_t i = 0; i < e.dims.size(); ++i) {
        entries.push_back(nlohmann::json::array({e.dims[i], e.weights[i]}));
      }
      points.push_back({{"id", id}, {"embedding", std::move(entries)}});
    }
  }
  const nlohmann::json doc = {{"format", "gus-index-snapshot-v1"},
                              {"points", std::move(points)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write snapshot: " + path);
  out << doc.dump() << '\n';
}

void SparseIndex::load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot: " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format", "") != "gus-index-snapshot-v1") {
    throw std::runtime_error("unrecognized snapshot format in " + path);
  }
  std::unique_lock lock(mutex_);
  id_to_slot_.clear();
  slot_to_id_.clear();
  embeddings_.clear();
  free_slots_.clear();
  postings_.clear();
  for (const auto& entry : doc.at("points")) {
    std::vector<std::pair<BucketId, double>> pairs;
    for (const auto& e : entry.at("embedding")) {
      pairs.emplace_back(e.at(0).get<BucketId>(), e.at(1).get<double>());
    }
    upsert_locked(entry.at("id").get<std::string>(),
                  SparseEmbedding::from_pairs(std::move(pairs)));
  }
}

}  // namespace gus::idx
