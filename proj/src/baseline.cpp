#include "gus/baseline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "gus/hash.hpp"
#include "gus/rng.hpp"

namespace gus::baseline {

namespace {

void emit_pairs(const std::vector<const std::string*>& members,
                std::set<ScoringPair>& out) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      out.insert(make_pair_canonical(*members[i], *members[j]));
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ScoringPair make_pair_canonical(std::string x, std::string y) {
  if (x == y) throw std::invalid_argument("self pair: " + x);
  if (y < x) x.swap(y);
  return {std::move(x), std::move(y)};
}

std::set<ScoringPair> grale_pairs(const std::vector<Point>& corpus,
                                  const lsh::LshScheme& scheme,
                                  std::optional<std::size_t> max_bucket_size,
                                  std::uint64_t seed) {
  if (max_bucket_size && *max_bucket_size < 2) {
    throw std::invalid_argument("max bucket size must be >= 2");
  }
  const lsh::Bucketizer bucketizer(scheme);
  // Ordered map + ascending member ids make the enumeration independent of
  // corpus order.
  std::map<lsh::BucketId, std::vector<const std::string*>> buckets;
  for (const Point& p : corpus) {
    for (const lsh::BucketId b : bucketizer.buckets(p)) {
      buckets[b].push_back(&p.id);
    }
  }

  std::set<ScoringPair> pairs;
  for (auto& [bucket, members] : buckets) {
    std::sort(members.begin(), members.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    // A bucket holds a set of points; duplicate corpus ids collapse here.
    members.erase(std::unique(members.begin(), members.end(),
                              [](const std::string* a, const std::string* b) {
                                return *a == *b;
                              }),
                  members.end());
    if (!max_bucket_size || members.size() <= *max_bucket_size) {
      emit_pairs(members, pairs);
      continue;
    }
    // Per-bucket stream so the split is independent of bucket visit order.
    rng::SplitMix64 gen(hashing::Hash64(seed).u64(bucket).digest());
    rng::shuffle(members, gen);
    for (std::size_t start = 0; start < members.size(); start += *max_bucket_size) {
      const std::size_t end = std::min(start + *max_bucket_size, members.size());
      std::vector<const std::string*> chunk(members.begin() + start,
                                            members.begin() + end);
      emit_pairs(chunk, pairs);
    }
  }
  return pairs;
}

std::vector<WeightedEdge> score_pairs(const std::set<ScoringPair>& pairs,
                                      const std::vector<Point>& corpus,
                                      const scorer::ModelWeights& weights) {
  std::unordered_map<std::string, const Point*> by_id;
  by_id.reserve(corpus.size());
  for (const Point& p : corpus) by_id[p.id] = &p;

  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const auto ia = by_id.find(a);
    const auto ib = by_id.find(b);
    if (ia == by_id.end() || ib == by_id.end()) {
      throw std::invalid_argument("pair references unknown id: " +
                                  (ia == by_id.end() ? a : b));
    }
    edges.push_back({a, b, scorer::score(*ia->second, *ib->second, weights).value});
  }
  return edges;
}

std::vector<WeightedEdge> topk_prune(const std::vector<WeightedEdge>& edges,
                                     std::size_t k, bool require_both) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");

  // Incident edge indices per point.
  std::unordered_map<std::string, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    incident[edges[i].a].push_back(i);
    incident[edges[i].b].push_back(i);
  }

  std::vector<int> keep_votes(edges.size(), 0);
  for (auto& [id, list] : incident) {
    std::sort(list.begin(), list.end(), [&](std::size_t x, std::size_t y) {
      if (edges[x].weight != edges[y].weight) return edges[x].weight > edges[y].weight;
      const std::string& nx = edges[x].a == id ? edges[x].b : edges[x].a;
      const std::string& ny = edges[y].a == id ? edges[y].b : edges[y].a;
      return nx < ny;
    });
    for (std::size_t i = 0; i < list.size() && i < k; ++i) ++keep_votes[list[i]];
  }

  const int needed = require_both ? 2 : 1;
  std::vector<WeightedEdge> kept;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (keep_votes[i] >= needed) kept.push_back(edges[i]);
  }
  return kept;
}

void write_edges_csv(const std::vector<WeightedEdge>& edges, const std::string& path) {
  std::vector<const WeightedEdge*> sorted;
  sorted.reserve(edges.size());
  for (const WeightedEdge& e : edges) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const WeightedEdge* x, const WeightedEdge* y) {
    if (x->a != y->a) return x->a < y->a;
    return x->b < y->b;
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write edges: " + path);
  out << "id_a,id_b,weight\n";
  for (const WeightedEdge* e : sorted) {
    out << e->a << ',' << e->b << ',' << format_double(e->weight) << '\n';
  }
}

std::vector<WeightedEdge> read_edges_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read edges: " + path);
  std::vector<WeightedEdge> edges;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("malformed edge row in " + path + ": " + line);
    }
    WeightedEdge e;
    e.a = line.substr(0, c1);
    e.b = line.substr(c1 + 1, c2 - c1 - 1);
    const auto res =
        std::from_chars(line.data() + c2 + 1, line.data() + line.size(), e.weight);
    if (res.ec != std::errc{}) {
      throw std::runtime_error("malformed edge weight in " + path + ": " + line);
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

}  // namespace gus::baseline
