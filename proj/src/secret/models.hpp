#pragma once

#include "secret/bayes_opt.hpp"
#include "secret/confidence.hpp"
#include "secret/dataset.hpp"
#include "secret/embeddings.hpp"
#include "secret/forest.hpp"
#include "secret/perceptron.hpp"

#include <string_view>
#include <variant>

namespace secret {

enum class Algorithm { forest, perceptron };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algo);

/// Name of the single tuned hyperparameter of each algorithm.
std::string_view tuned_parameter(Algorithm algo);

/// Settings that are not tuned.
struct ModelSettings {
  ForestParams forest;
  MlpOptions perceptron;
};

/// n_trees in [1, 100] for forests, hidden_units in [1, 64] for perceptrons.
HyperparameterSpace default_space(Algorithm algo);

/// A trained feature-space model: per-class confidences for new instances.
class Classifier {
 public:
  explicit Classifier(Forest f) : model_(std::move(f)) {}
  explicit Classifier(Perceptron p) : model_(std::move(p)) {}

  ConfidenceMatrix confidence(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;
  Algorithm algorithm() const;
  const Forest* forest() const { return std::get_if<Forest>(&model_); }
  const Perceptron* perceptron() const { return std::get_if<Perceptron>(&model_); }

 private:
  std::variant<Forest, Perceptron> model_;
};

/// A trained semantic-space model: one D-vector per instance.
class Regressor {
 public:
  explicit Regressor(Forest f) : model_(std::move(f)) {}
  explicit Regressor(Perceptron p) : model_(std::move(p)) {}

  Matrix predict(const Matrix& X) const;
  Algorithm algorithm() const;
  const Forest* forest() const { return std::get_if<Forest>(&model_); }
  const Perceptron* perceptron() const { return std::get_if<Perceptron>(&model_); }

 private:
  std::variant<Forest, Perceptron> model_;
};

Classifier train_classifier(Algorithm algo, const Dataset& data, const HyperparameterPoint& hyp,
                            const ModelSettings& settings, std::uint64_t seed);

/// Regression targets are the label vectors of each instance's class.
Regressor train_regressor(Algorithm algo, const Dataset& data, const LabelVectorSet& vectors,
                          const HyperparameterPoint& hyp, const ModelSettings& settings,
                          std::uint64_t seed);

/// Row i = V[y[i]].
Matrix semantic_targets(std::span<const int> y, const LabelVectorSet& vectors);

}  // namespace secret
