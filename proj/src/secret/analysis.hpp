#pragma once

#include "secret/embeddings.hpp"
#include "secret/forest.hpp"

#include <span>
#include <string>
#include <vector>

namespace secret {

/// Leaf-depth statistics of one forest.
struct DepthReport {
  int fold = 0;
  int n_trees = 0;
  /// Mean over trees of the mean depth of the leaves assigned to each class.
  std::vector<double> per_class_avg_depth;
  /// False for classes that no leaf of any tree was assigned.
  std::vector<bool> present;
  /// Sample variance of the present per-class averages; 0 with fewer than two.
  double overall_variance = 0.0;
  std::vector<std::string> warnings;
};

/// Leaves are the decision sites. A classifier leaf takes the argmax of its
/// class histogram; a regressor leaf takes the nearest label vector, so
/// `vectors` is required for regressor forests.
DepthReport node_depth_stats(const Forest& forest, int n_classes, const LabelVectorSet* vectors = nullptr);

/// Divides by n - 1. Returns 0 for fewer than two values.
double sample_variance(std::span<const double> values);

struct DepthComparison {
  int n_folds = 0;
  double traditional_mean_variance = 0.0;
  double secret_mean_variance = 0.0;
  /// Sample variance over every (fold, class) average of each side.
  double traditional_pooled_variance = 0.0;
  double secret_pooled_variance = 0.0;
  int secret_larger = 0;
  int traditional_larger = 0;
  int equal = 0;
};

/// Folds are matched by id; both sides must cover the same folds.
DepthComparison compare_depth_variance(std::span<const DepthReport> traditional,
                                       std::span<const DepthReport> secret);

}  // namespace secret
