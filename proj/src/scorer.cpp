#include "gus/scorer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "gus/kernels.hpp"

namespace gus::scorer {

namespace {

const std::vector<double> kNoVector;
const std::vector<std::string> kNoTokens;

const std::vector<double>& dense_or_empty(const Point& p, const std::string& field) {
  const auto it = p.dense.find(field);
  return it != p.dense.end() ? it->second : kNoVector;
}

const std::vector<std::string>& tokens_or_empty(const Point& p,
                                                const std::string& field) {
  const auto it = p.tokens.find(field);
  return it != p.tokens.end() ? it->second : kNoTokens;
}

void check_dense(const Point& p, const FieldSpec& f, const std::vector<double>& v) {
  if (!v.empty() && v.size() != f.dim) {
    throw std::invalid_argument("point '" + p.id + "' dense field '" + f.name +
                                "': expected dim " + std::to_string(f.dim) +
                                ", got " + std::to_string(v.size()));
  }
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::size_t ModelWeights::feature_size() const {
  std::size_t n = 0;
  for (const FieldSpec& f : input_spec) {
    n += f.kind == FieldSpec::Kind::kDense ? 2 * f.dim : 2;
  }
  return n;
}

std::vector<double> pair_features(const Point& a, const Point& b,
                                  const std::vector<FieldSpec>& spec) {
  const auto& ops = kernels::active_ops();
  std::vector<double> out;
  for (const FieldSpec& f : spec) {
    if (f.kind == FieldSpec::Kind::kDense) {
      const auto& va = dense_or_empty(a, f.name);
      const auto& vb = dense_or_empty(b, f.name);
      check_dense(a, f, va);
      check_dense(b, f, vb);
      const std::size_t base = out.size();
      out.resize(base + 2 * f.dim, 0.0);
      if (!va.empty() && !vb.empty()) {
        ops.abs_diff(va.data(), vb.data(), out.data() + base, f.dim);
        ops.hadamard(va.data(), vb.data(), out.data() + base + f.dim, f.dim);
      } else if (va.empty() != vb.empty()) {
        // One side missing: |x - 0| = |x|, x * 0 = 0.
        const auto& present = va.empty() ? vb : va;
        for (std::size_t i = 0; i < f.dim; ++i) out[base + i] = std::fabs(present[i]);
      }
    } else {
      const auto& ta = tokens_or_empty(a, f.name);
      const auto& tb = tokens_or_empty(b, f.name);
      const std::unordered_set<std::string> sa(ta.begin(), ta.end());
      const std::unordered_set<std::string> sb(tb.begin(), tb.end());
      std::size_t shared = 0;
      for (const auto& t : sa) shared += sb.count(t);
      const std::size_t unions = sa.size() + sb.size() - shared;
      out.push_back(unions == 0 ? 0.0
                                : static_cast<double>(shared) / static_cast<double>(unions));
      out.push_back(std::log1p(static_cast<double>(shared)));
    }
  }
  return out;
}

void validate(const ModelWeights& weights) {
  if (weights.layers.empty()) throw std::invalid_argument("model has no layers");
  std::size_t width = weights.feature_size();
  for (std::size_t i = 0; i < weights.layers.size(); ++i) {
    const Layer& layer = weights.layers[i];
    if (layer.rows == 0 || layer.cols == 0) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": empty shape");
    }
    if (layer.w.size() != layer.rows * layer.cols) {
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  ": weight matrix size does not match rows*cols");
    }
    if (layer.b.size() != layer.rows) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": bias length " +
                                  std::to_string(layer.b.size()) + " != rows " +
                                  std::to_string(layer.rows));
    }
    if (layer.cols != width) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": input width " +
                                  std::to_string(layer.cols) + " does not compose (expected " +
                                  std::to_string(width) + ")");
    }
    width = layer.rows;
  }
  if (width != 1) {
    throw std::invalid_argument("final layer must have exactly 1 output");
  }
}

Similarity score(const Point& a, const Point& b, const ModelWeights& weights) {
  validate(weights);
  const auto& ops = kernels::active_ops();
  std::vector<double> x = pair_features(a, b, weights.input_spec);
  if (x.size() != weights.feature_size()) {
    throw std::invalid_argument("pair feature length mismatch");
  }
  std::vector<double> y;
  for (std::size_t i = 0; i < weights.layers.size(); ++i) {
    const Layer& layer = weights.layers[i];
    y.resize(layer.rows);
    ops.matvec_bias(layer.w.data(), layer.rows, layer.cols, x.data(),
                    layer.b.data(), y.data());
    if (i + 1 < weights.layers.size()) ops.relu(y.data(), y.size());
    x.swap(y);
  }
  return Similarity{logistic(x[0])};
}

ModelWeights weights_from_json(const nlohmann::json& j) {
  ModelWeights weights;
  for (const auto& f : j.at("input_spec")) {
    FieldSpec spec;
    spec.name = f.at("name").get<std::string>();
    const std::string kind = f.at("kind").get<std::string>();
    if (kind == "dense") {
      spec.kind = FieldSpec::Kind::kDense;
      spec.dim = f.at("dim").get<std::size_t>();
    } else if (kind == "tokens") {
      spec.kind = FieldSpec::Kind::kTokens;
    } else {
      throw std::runtime_error("input_spec kind must be 'dense' or 'tokens'");
    }
    weights.input_spec.push_back(std::move(spec));
  }
  for (const auto& l : j.at("layers")) {
    Layer layer;
    const auto& rows = l.at("w");
    layer.rows = rows.size();
    for (const auto& row : rows) {
      if (layer.cols == 0) layer.cols = row.size();
      if (row.size() != layer.cols) {
        throw std::runtime_error("layer " + std::to_string(weights.layers.size()) +
                                 ": ragged weight matrix");
      }
      for (const auto& v : row) layer.w.push_back(v.get<double>());
    }
    for (const auto& v : l.at("b")) layer.b.push_back(v.get<double>());
    weights.layers.push_back(std::move(layer));
  }
  validate(weights);
  return weights;
}

nlohmann::json weights_to_json(const ModelWeights& weights) {
  nlohmann::json spec = nlohmann::json::array();
  for (const FieldSpec& f : weights.input_spec) {
    if (f.kind == FieldSpec::Kind::kDense) {
      spec.push_back({{"name", f.name}, {"kind", "dense"}, {"dim", f.dim}});
    } else {
      spec.push_back({{"name", f.name}, {"kind", "tokens"}});
    }
  }
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : weights.layers) {
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t r = 0; r < layer.rows; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < layer.cols; ++c) row.push_back(layer.w[r * layer.cols + c]);
      w.push_back(std::move(row));
    }
    layers.push_back({{"w", std::move(w)}, {"b", layer.b}});
  }
  return {{"input_spec", std::move(spec)}, {"layers", std::move(layers)}};
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model weights: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed model weights file " + path + ": " + e.what());
  }
  try {
    return weights_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model weights schema error in " + path + ": " + e.what());
  }
}

void save_weights(const ModelWeights& weights, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model weights: " + path);
  out << weights_to_json(weights).dump(2) << '\n';
}

}  // namespace gus::scorer
