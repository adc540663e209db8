#include "secret/perceptron.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace secret {
namespace {

void check_input(const Perceptron& net, const Matrix& X) {
  if (X.cols() != net.n_inputs()) {
    fail(ErrorCode::invalid_argument, "perceptron expects " + std::to_string(net.n_inputs()) +
                                          " inputs, got " + std::to_string(X.cols()));
  }
}

// Backpropagates d(loss)/d(output layer) through both layers.
MlpGradient backward(const Perceptron& net, const Matrix& X, const Matrix& H, const Matrix& d_out) {
  MlpGradient g;
  g.W2 = d_out.transpose() * H;
  g.b2 = d_out.colwise().sum().transpose();
  const Matrix d_hidden = (d_out * net.W2()).array() * (1.0 - H.array().square());
  g.W1 = d_hidden.transpose() * X;
  g.b1 = d_hidden.colwise().sum().transpose();
  return g;
}

Matrix select_rows(const Matrix& M, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = M.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

template <typename BatchGradient, typename FullLoss>
void optimize(Perceptron& net, std::size_t n, const MlpOptions& options, Rng& rng,
              BatchGradient batch_gradient, FullLoss full_loss) {
  require(options.batch_size >= 1, "perceptron: batch_size must be positive");
  require(options.max_epochs >= 1, "perceptron: max_epochs must be positive");
  MlpGradient velocity{Matrix::Zero(net.W1().rows(), net.W1().cols()), Vector::Zero(net.b1().size()),
                       Matrix::Zero(net.W2().rows(), net.W2().cols()), Vector::Zero(net.b2().size())};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(options.batch_size);

  std::vector<double> history;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const auto stop = std::min(n, start + batch);
      const auto g = batch_gradient(std::span<const std::size_t>(order).subspan(start, stop - start));
      velocity.W1 = options.momentum * velocity.W1 - options.learning_rate * g.W1;
      velocity.b1 = options.momentum * velocity.b1 - options.learning_rate * g.b1;
      velocity.W2 = options.momentum * velocity.W2 - options.learning_rate * g.W2;
      velocity.b2 = options.momentum * velocity.b2 - options.learning_rate * g.b2;
      net.apply_step(velocity);
    }
    const double loss = full_loss();
    if (!std::isfinite(loss)) {
      fail(ErrorCode::numeric, "perceptron training loss became non-finite at epoch " +
                                   std::to_string(epoch + 1));
    }
    history.push_back(loss);
    if (std::isinf(best) || loss < best - options.tolerance * best) {
      best = loss;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  net.set_loss_history(std::move(history));
}

}  // namespace

Perceptron::Perceptron(PerceptronMode mode, Matrix W1, Vector b1, Matrix W2, Vector b2)
    : mode_(mode), W1_(std::move(W1)), b1_(std::move(b1)), W2_(std::move(W2)), b2_(std::move(b2)) {
  require(W1_.rows() >= 1, "perceptron: hidden_units must be at least 1");
  require(b1_.size() == W1_.rows(), "perceptron: b1 size differs from hidden units");
  require(W2_.cols() == W1_.rows(), "perceptron: W2 columns differ from hidden units");
  require(b2_.size() == W2_.rows(), "perceptron: b2 size differs from outputs");
  require(W2_.rows() >= 1 && W1_.cols() >= 1, "perceptron: empty input or output layer");
}

Perceptron Perceptron::initialize(PerceptronMode mode, int n_inputs, int hidden_units,
                                  int n_outputs, Rng& rng) {
  require(hidden_units >= 1, "perceptron: hidden_units must be at least 1");
  auto glorot = [&rng](int fan_out, int fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix W(fan_out, fan_in);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = rng.uniform(-limit, limit);
    }
    return W;
  };
  Matrix W1 = glorot(hidden_units, n_inputs);
  Matrix W2 = glorot(n_outputs, hidden_units);
  return Perceptron(mode, std::move(W1), Vector::Zero(hidden_units), std::move(W2),
                    Vector::Zero(n_outputs));
}

Matrix Perceptron::hidden(const Matrix& X) const {
  return ((X * W1_.transpose()).rowwise() + b1_.transpose()).array().tanh().matrix();
}

Matrix Perceptron::output_layer(const Matrix& X) const {
  check_input(*this, X);
  return (hidden(X) * W2_.transpose()).rowwise() + b2_.transpose();
}

void Perceptron::apply_step(const MlpGradient& step) {
  W1_ += step.W1;
  b1_ += step.b1;
  W2_ += step.W2;
  b2_ += step.b2;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double classifier_loss(const Perceptron& net, const Matrix& X, std::span<const int> y) {
  const Matrix logits = net.output_layer(X);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    loss += lse - logits(i, y[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(logits.rows());
}

double regressor_loss(const Perceptron& net, const Matrix& X, const Matrix& targets) {
  const Matrix residual = net.output_layer(X) - targets;
  return 0.5 * residual.squaredNorm() / static_cast<double>(X.rows());
}

LossAndGradient classifier_loss_gradient(const Perceptron& net, const Matrix& X,
                                         std::span<const int> y) {
  check_input(net, X);
  require(static_cast<std::size_t>(X.rows()) == y.size(), "perceptron: X rows and y length differ");
  const Matrix H = net.hidden(X);
  const Matrix logits = (H * net.W2().transpose()).rowwise() + net.b2().transpose();
  Matrix d_out = softmax_rows(logits);
  const double n = static_cast<double>(X.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto c = y[static_cast<std::size_t>(i)];
    loss -= std::log(d_out(i, c));
    d_out(i, c) -= 1.0;
  }
  d_out /= n;
  return {loss / n, backward(net, X, H, d_out)};
}

LossAndGradient regressor_loss_gradient(const Perceptron& net, const Matrix& X,
                                        const Matrix& targets) {
  check_input(net, X);
  require(targets.rows() == X.rows() && targets.cols() == net.n_outputs(),
          "perceptron: target shape mismatch");
  const Matrix H = net.hidden(X);
  const Matrix residual = ((H * net.W2().transpose()).rowwise() + net.b2().transpose()) - targets;
  const double n = static_cast<double>(X.rows());
  return {0.5 * residual.squaredNorm() / n, backward(net, X, H, residual / n)};
}

Perceptron train_mlp_classifier(const Matrix& X, std::span<const int> y, int n_classes,
                                int hidden_units, const MlpOptions& options, std::uint64_t seed) {
  require(X.rows() > 0, "perceptron: empty training set");
  require(static_cast<std::size_t>(X.rows()) == y.size(), "perceptron: X rows and y length differ");
  for (int c : y) require(c >= 0 && c < n_classes, "perceptron: class id out of range");
  Rng rng(seed);
  auto net = Perceptron::initialize(PerceptronMode::classifier, static_cast<int>(X.cols()),
                                    hidden_units, n_classes, rng);
  std::vector<int> batch_y;
  optimize(
      net, y.size(), options, rng,
      [&](std::span<const std::size_t> rows) {
        batch_y.clear();
        for (auto r : rows) batch_y.push_back(y[r]);
        return classifier_loss_gradient(net, select_rows(X, rows), batch_y).gradient;
      },
      [&] { return classifier_loss(net, X, y); });
  return net;
}

Perceptron train_mlp_regressor(const Matrix& X, const Matrix& targets, int hidden_units,
                               const MlpOptions& options, std::uint64_t seed) {
  require(X.rows() > 0, "perceptron: empty training set");
  require(targets.rows() == X.rows() && targets.cols() > 0, "perceptron: target shape mismatch");
  Rng rng(seed);
  auto net = Perceptron::initialize(PerceptronMode::regressor, static_cast<int>(X.cols()),
                                    hidden_units, static_cast<int>(targets.cols()), rng);
  optimize(
      net, static_cast<std::size_t>(X.rows()), options, rng,
      [&](std::span<const std::size_t> rows) {
        return regressor_loss_gradient(net, select_rows(X, rows), select_rows(targets, rows))
            .gradient;
      },
      [&] { return regressor_loss(net, X, targets); });
  return net;
}

ConfidenceMatrix mlp_classifier_confidence(const Perceptron& net, const Matrix& X) {
  require(net.mode() == PerceptronMode::classifier, "perceptron is not a classifier");
  return ConfidenceMatrix(softmax_rows(net.output_layer(X)));
}

Matrix mlp_regressor_predict(const Perceptron& net, const Matrix& X) {
  require(net.mode() == PerceptronMode::regressor, "perceptron is not a regressor");
  return net.output_layer(X);
}

}  // namespace secret
