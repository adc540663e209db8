#include "secret/metrics.hpp"

namespace secret {
namespace {

void check_lengths(std::span<const int> y_true, std::span<const int> y_pred) {
  require(y_true.size() == y_pred.size(), "metrics: true and predicted lengths differ (" +
                                              std::to_string(y_true.size()) + " vs " +
                                              std::to_string(y_pred.size()) + ")");
  require(!y_true.empty(), "metrics: no instances");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int n_classes)
    : counts_(Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_classes, n_classes)),
      unassigned_(static_cast<std::size_t>(n_classes), 0) {
  require(n_classes >= 1, "metrics: need at least one class");
  check_lengths(y_true, y_pred);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    require(t >= 0 && t < n_classes, "metrics: true class id out of range");
    if (p == kNoLabel) {
      ++unassigned_[static_cast<std::size_t>(t)];
    } else {
      require(p >= 0 && p < n_classes, "metrics: predicted class id out of range");
      ++counts_(t, p);
    }
    ++total_;
  }
}

long ConfusionMatrix::false_positives(int k) const { return counts_.col(k).sum() - counts_(k, k); }

long ConfusionMatrix::false_negatives(int k) const {
  return counts_.row(k).sum() - counts_(k, k) + unassigned_[static_cast<std::size_t>(k)];
}

double ConfusionMatrix::precision(int k) const {
  const long denom = true_positives(k) + false_positives(k);
  return denom == 0 ? 0.0 : static_cast<double>(true_positives(k)) / static_cast<double>(denom);
}

double ConfusionMatrix::recall(int k) const {
  const long denom = true_positives(k) + false_negatives(k);
  return denom == 0 ? 0.0 : static_cast<double>(true_positives(k)) / static_cast<double>(denom);
}

double ConfusionMatrix::f1(int k) const {
  const double p = precision(k), r = recall(k);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true, y_pred);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i] && y_pred[i] != kNoLabel;
  return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

double macro_f1(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  const ConfusionMatrix cm(y_true, y_pred, n_classes);
  double sum = 0.0;
  for (int k = 0; k < n_classes; ++k) sum += cm.f1(k);
  return sum / n_classes;
}

Scores score(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  return {accuracy(y_true, y_pred), macro_f1(y_true, y_pred, n_classes)};
}

}  // namespace secret
