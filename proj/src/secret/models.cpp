#include "secret/models.hpp"

#include <cmath>

namespace secret {
namespace {

int integer_parameter(const HyperparameterPoint& hyp, std::string_view name) {
  const auto it = hyp.find(std::string(name));
  if (it == hyp.end()) {
    fail(ErrorCode::invalid_argument, "missing hyperparameter '" + std::string(name) + "'");
  }
  const auto v = std::lround(it->second);
  if (v < 1) {
    fail(ErrorCode::invalid_argument,
         "hyperparameter '" + std::string(name) + "' must be at least 1, got " + std::to_string(v));
  }
  return static_cast<int>(v);
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "forest" || lower == "rf") return Algorithm::forest;
  if (lower == "perceptron" || lower == "mlp") return Algorithm::perceptron;
  fail(ErrorCode::config, "unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algo) {
  return algo == Algorithm::forest ? "forest" : "perceptron";
}

std::string_view tuned_parameter(Algorithm algo) {
  return algo == Algorithm::forest ? "n_trees" : "hidden_units";
}

HyperparameterSpace default_space(Algorithm algo) {
  HyperparameterSpace space;
  if (algo == Algorithm::forest) {
    space.add_integer("n_trees", 1, 100);
  } else {
    space.add_integer("hidden_units", 1, 64);
  }
  return space;
}

ConfidenceMatrix Classifier::confidence(const Matrix& X) const {
  if (const auto* f = forest()) return forest_classifier_confidence(*f, X);
  return mlp_classifier_confidence(*perceptron(), X);
}

std::vector<int> Classifier::predict(const Matrix& X) const {
  const auto conf = confidence(X);
  std::vector<int> out(static_cast<std::size_t>(conf.rows()));
  for (Eigen::Index i = 0; i < conf.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = argmax_lowest(conf.scores.row(i));
  }
  return out;
}

Algorithm Classifier::algorithm() const {
  return forest() ? Algorithm::forest : Algorithm::perceptron;
}

Matrix Regressor::predict(const Matrix& X) const {
  if (const auto* f = forest()) return forest_regressor_predict(*f, X);
  return mlp_regressor_predict(*perceptron(), X);
}

Algorithm Regressor::algorithm() const {
  return forest() ? Algorithm::forest : Algorithm::perceptron;
}

Matrix semantic_targets(std::span<const int> y, const LabelVectorSet& vectors) {
  Matrix T(static_cast<Eigen::Index>(y.size()), vectors.dim());
  for (std::size_t i = 0; i < y.size(); ++i) {
    require(y[i] >= 0 && y[i] < vectors.n_classes(), "class id has no label vector");
    T.row(static_cast<Eigen::Index>(i)) = vectors.V.row(y[i]);
  }
  return T;
}

Classifier train_classifier(Algorithm algo, const Dataset& data, const HyperparameterPoint& hyp,
                            const ModelSettings& settings, std::uint64_t seed) {
  if (algo == Algorithm::forest) {
    auto params = settings.forest;
    params.n_trees = integer_parameter(hyp, "n_trees");
    return Classifier(train_forest_classifier(data.X, data.y, data.n_classes(), params, seed));
  }
  return Classifier(train_mlp_classifier(data.X, data.y, data.n_classes(),
                                         integer_parameter(hyp, "hidden_units"),
                                         settings.perceptron, seed));
}

Regressor train_regressor(Algorithm algo, const Dataset& data, const LabelVectorSet& vectors,
                          const HyperparameterPoint& hyp, const ModelSettings& settings,
                          std::uint64_t seed) {
  const Matrix T = semantic_targets(data.y, vectors);
  if (algo == Algorithm::forest) {
    auto params = settings.forest;
    params.n_trees = integer_parameter(hyp, "n_trees");
    return Regressor(train_forest_regressor(data.X, T, params, seed));
  }
  return Regressor(
      train_mlp_regressor(data.X, T, integer_parameter(hyp, "hidden_units"), settings.perceptron, seed));
}

}  // namespace secret
