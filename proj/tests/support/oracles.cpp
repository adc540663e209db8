#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace secret::testing {
namespace {

double gini(const std::vector<double>& counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  if (n == 0.0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / n) * (c / n);
  return s;
}

}  // namespace

RootSplit root_split_oracle(const Matrix& X, const std::vector<int>& y, int n_classes) {
  RootSplit best;
  if (std::all_of(y.begin(), y.end(), [&](int c) { return c == y.front(); })) return best;
  double best_impurity = 0.0;
  const auto n = static_cast<double>(y.size());
  for (int f = 0; f < X.cols(); ++f) {
    std::vector<double> values(X.col(f).data(), X.col(f).data() + X.rows());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double threshold = (values[v] + values[v + 1]) / 2.0;
      std::vector<double> left(static_cast<std::size_t>(n_classes), 0.0), right = left;
      double nl = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (X(static_cast<Eigen::Index>(i), f) <= threshold) {
          left[static_cast<std::size_t>(y[i])] += 1.0;
          nl += 1.0;
        } else {
          right[static_cast<std::size_t>(y[i])] += 1.0;
        }
      }
      const double impurity = nl / n * gini(left) + (n - nl) / n * gini(right);
      // Strictly lower impurity wins; equal impurity keeps the earlier (feature, threshold).
      if (best.leaf || impurity < best_impurity - 1e-12) {
        best = {false, f, threshold};
        best_impurity = impurity;
      }
    }
  }
  return best;
}

std::size_t for_each_tiny_dataset(int max_size,
                                  const std::function<void(const Matrix&, const std::vector<int>&)>& visit) {
  std::size_t count = 0;
  std::vector<int> multiplicity(8, 0);
  // Enumerate multiplicity vectors with total in [1, max_size].
  std::function<void(int, int)> rec = [&](int type, int remaining) {
    if (type == 8) {
      int total = 0;
      for (int m : multiplicity) total += m;
      if (total == 0) return;
      Matrix X(total, 2);
      std::vector<int> y;
      int row = 0;
      for (int t = 0; t < 8; ++t) {
        for (int r = 0; r < multiplicity[static_cast<std::size_t>(t)]; ++r) {
          X(row, 0) = t & 1;
          X(row, 1) = (t >> 1) & 1;
          y.push_back((t >> 2) & 1);
          ++row;
        }
      }
      visit(X, y);
      ++count;
      return;
    }
    for (int m = 0; m <= remaining; ++m) {
      multiplicity[static_cast<std::size_t>(type)] = m;
      rec(type + 1, remaining - m);
    }
    multiplicity[static_cast<std::size_t>(type)] = 0;
  };
  rec(0, max_size);
  return count;
}

OracleScores brute_force_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred, int n_classes) {
  OracleScores s;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];
  s.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  double sum = 0.0;
  for (int k = 0; k < n_classes; ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      if (y_true[i] == k && y_pred[i] == k) tp += 1;
      if (y_true[i] != k && y_pred[i] == k) fp += 1;
      if (y_true[i] == k && y_pred[i] != k) fn += 1;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  s.macro_f1 = sum / n_classes;
  return s;
}

std::vector<double> ss_conf_oracle(const std::vector<double>& d2, double epsilon) {
  double denom = 0.0;
  for (double d : d2) denom += 1.0 / (d + epsilon);
  std::vector<double> out;
  for (double d : d2) out.push_back((1.0 / (d + epsilon)) / denom);
  return out;
}

double finite_difference_error(const Perceptron& net, const MlpGradient& gradient,
                               const std::function<double(const Perceptron&)>& loss, double step) {
  double worst = 0.0;
  const auto zero = [&] {
    return MlpGradient{Matrix::Zero(net.W1().rows(), net.W1().cols()), Vector::Zero(net.b1().size()),
                       Matrix::Zero(net.W2().rows(), net.W2().cols()), Vector::Zero(net.b2().size())};
  };
  // `pick` returns the scalar of a step struct that the probe perturbs.
  const auto probe = [&](const std::function<double&(MlpGradient&)>& pick, double analytic) {
    MlpGradient up = zero(), down = zero();
    pick(up) = step;
    pick(down) = -step;
    Perceptron plus = net, minus = net;
    plus.apply_step(up);
    minus.apply_step(down);
    const double numeric = (loss(plus) - loss(minus)) / (2.0 * step);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (Eigen::Index r = 0; r < net.W1().rows(); ++r)
    for (Eigen::Index c = 0; c < net.W1().cols(); ++c)
      probe([&](MlpGradient& s) -> double& { return s.W1(r, c); }, gradient.W1(r, c));
  for (Eigen::Index r = 0; r < net.b1().size(); ++r)
    probe([&](MlpGradient& s) -> double& { return s.b1(r); }, gradient.b1(r));
  for (Eigen::Index r = 0; r < net.W2().rows(); ++r)
    for (Eigen::Index c = 0; c < net.W2().cols(); ++c)
      probe([&](MlpGradient& s) -> double& { return s.W2(r, c); }, gradient.W2(r, c));
  for (Eigen::Index r = 0; r < net.b2().size(); ++r)
    probe([&](MlpGradient& s) -> double& { return s.b2(r); }, gradient.b2(r));
  return worst;
}

Perceptron random_perceptron(PerceptronMode mode, int inputs, int hidden, int outputs, Rng& rng) {
  auto net = Perceptron::initialize(mode, inputs, hidden, outputs, rng);
  MlpGradient bias{Matrix::Zero(hidden, inputs), Vector::Zero(hidden), Matrix::Zero(outputs, hidden),
                   Vector::Zero(outputs)};
  for (Eigen::Index i = 0; i < bias.b1.size(); ++i) bias.b1(i) = rng.uniform(-0.5, 0.5);
  for (Eigen::Index i = 0; i < bias.b2.size(); ++i) bias.b2(i) = rng.uniform(-0.5, 0.5);
  net.apply_step(bias);
  return net;
}

}  // namespace secret::testing
