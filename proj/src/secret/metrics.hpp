#pragma once

#include "secret/common.hpp"

#include <span>
#include <vector>

namespace secret {

/// counts(k, m) = number of instances of true class k predicted as m.
/// Predictions of kNoLabel are kept aside; they count against recall only.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

  int n_classes() const { return static_cast<int>(counts_.rows()); }
  long count(int true_class, int predicted) const { return counts_(true_class, predicted); }
  long unassigned(int true_class) const { return unassigned_[static_cast<std::size_t>(true_class)]; }
  long total() const { return total_; }
  long correct() const { return counts_.trace(); }

  long true_positives(int k) const { return counts_(k, k); }
  long false_positives(int k) const;
  long false_negatives(int k) const;

  double precision(int k) const;
  double recall(int k) const;
  double f1(int k) const;

 private:
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts_;
  std::vector<long> unassigned_;
  long total_ = 0;
};

double accuracy(std::span<const int> y_true, std::span<const int> y_pred);
/// Averaged over all n_classes, including classes absent from both inputs.
double macro_f1(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

struct Scores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

Scores score(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

}  // namespace secret
