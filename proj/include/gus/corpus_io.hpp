#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/point.hpp"

namespace gus::io {

// One point per line:
// {"id": "...", "dense": {"field": [f64...]}, "tokens": {"field": ["..."]}}
// Unknown keys are ignored. Parse errors report the 1-based line number.
std::vector<Point> read_corpus(const std::string& path);
void write_corpus(const std::vector<Point>& corpus, const std::string& path);

Point point_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const Point& p);

// Keeps the last record for each id (in file order). duplicate_count
// reports how many earlier records were shadowed.
std::vector<Point> dedupe_last_wins(std::vector<Point> corpus,
                                    std::size_t* duplicate_count);

}  // namespace gus::io
