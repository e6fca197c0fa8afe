#pragma once

#include <map>
#include <string>
#include <vector>

namespace gus {

// A data point with multimodal features: any number of named dense vectors
// plus any number of named token lists. Ordered maps keep iteration (and
// therefore every derived artifact) deterministic.
struct Point {
  std::string id;
  std::map<std::string, std::vector<double>> dense;
  std::map<std::string, std::vector<std::string>> tokens;

  bool operator==(const Point&) const = default;
};

}  // namespace gus
