#pragma once

#include "secret/common.hpp"
#include "secret/confidence.hpp"

#include <span>
#include <vector>

namespace secret {

enum class PerceptronMode { classifier, regressor };

struct MlpOptions {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int batch_size = 32;
  int max_epochs = 500;
  /// Epochs without a relative training-loss improvement larger than `tolerance`.
  int patience = 25;
  double tolerance = 1e-4;
};

struct MlpGradient {
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;
};

/// One tanh hidden layer. Classifier output is softmax, regressor output is
/// linear. Weight shapes: W1 hidden x inputs, W2 outputs x hidden.
class Perceptron {
 public:
  Perceptron(PerceptronMode mode, Matrix W1, Vector b1, Matrix W2, Vector b2);

  /// Glorot-uniform weights, zero biases.
  static Perceptron initialize(PerceptronMode mode, int n_inputs, int hidden_units, int n_outputs,
                               Rng& rng);

  PerceptronMode mode() const { return mode_; }
  int n_inputs() const { return static_cast<int>(W1_.cols()); }
  int hidden_units() const { return static_cast<int>(W1_.rows()); }
  int n_outputs() const { return static_cast<int>(W2_.rows()); }

  const Matrix& W1() const { return W1_; }
  const Vector& b1() const { return b1_; }
  const Matrix& W2() const { return W2_; }
  const Vector& b2() const { return b2_; }

  /// Hidden activations (n x hidden).
  Matrix hidden(const Matrix& X) const;
  /// Pre-softmax logits (classifier) or predictions (regressor), n x outputs.
  Matrix output_layer(const Matrix& X) const;

  void apply_step(const MlpGradient& step);

  /// Per-epoch full-data training loss.
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> h) { loss_history_ = std::move(h); }

 private:
  PerceptronMode mode_;
  Matrix W1_;
  Vector b1_;
  Matrix W2_;
  Vector b2_;
  std::vector<double> loss_history_;
};

Matrix softmax_rows(const Matrix& logits);

/// Mean cross-entropy over instances.
double classifier_loss(const Perceptron& net, const Matrix& X, std::span<const int> y);
/// (1 / 2n) * sum of squared residuals.
double regressor_loss(const Perceptron& net, const Matrix& X, const Matrix& targets);

struct LossAndGradient {
  double loss = 0.0;
  MlpGradient gradient;
};

LossAndGradient classifier_loss_gradient(const Perceptron& net, const Matrix& X,
                                         std::span<const int> y);
LossAndGradient regressor_loss_gradient(const Perceptron& net, const Matrix& X,
                                        const Matrix& targets);

/// Mini-batch gradient descent with momentum; stops at max_epochs or when the
/// training loss stops improving for `patience` epochs.
Perceptron train_mlp_classifier(const Matrix& X, std::span<const int> y, int n_classes,
                                int hidden_units, const MlpOptions& options, std::uint64_t seed);
Perceptron train_mlp_regressor(const Matrix& X, const Matrix& targets, int hidden_units,
                               const MlpOptions& options, std::uint64_t seed);

ConfidenceMatrix mlp_classifier_confidence(const Perceptron& net, const Matrix& X);
Matrix mlp_regressor_predict(const Perceptron& net, const Matrix& X);

}  // namespace secret
