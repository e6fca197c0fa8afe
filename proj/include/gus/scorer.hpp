#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gus/point.hpp"

namespace gus::scorer {

struct FieldSpec {
  enum class Kind { kDense, kTokens };
  std::string name;
  Kind kind = Kind::kDense;
  std::size_t dim = 0;  // dense only
};

struct Layer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> w;  // row-major rows x cols
  std::vector<double> b;  // rows
};

// Feed-forward similarity model: rectifier hidden layers, logistic scalar
// output. The reference fixture shipped with the repo uses two hidden
// layers of 10 units; the shapes here are general.
struct ModelWeights {
  std::vector<FieldSpec> input_spec;
  std::vector<Layer> layers;

  std::size_t feature_size() const;
};

// Similarity in the open interval (0, 1).
struct Similarity {
  double value = 0.5;
};

// Symmetric pair representation: per dense field the elementwise |a-b|
// followed by the elementwise a*b; per token field the Jaccard overlap and
// log1p of the shared-token count. Fields appear in input_spec order.
// Missing fields read as zeros / empty token sets; a dense field with the
// wrong length throws std::invalid_argument. Symmetric under (a, b) swap
// down to the bit level.
std::vector<double> pair_features(const Point& a, const Point& b,
                                  const std::vector<FieldSpec>& spec);

// Throws std::invalid_argument when the model shapes do not compose with
// the pair-feature length.
Similarity score(const Point& a, const Point& b, const ModelWeights& weights);

// Validates shape composition; errors name the offending layer.
void validate(const ModelWeights& weights);

// Weights file: JSON {"input_spec": [{"name", "kind", "dim"}...],
//                     "layers": [{"w": [[...]...], "b": [...]}...]}.
ModelWeights weights_from_json(const nlohmann::json& j);
nlohmann::json weights_to_json(const ModelWeights& weights);
ModelWeights load_weights(const std::string& path);
void save_weights(const ModelWeights& weights, const std::string& path);

}  // namespace gus::scorer
