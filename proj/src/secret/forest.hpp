#pragma once

#include "secret/common.hpp"
#include "secret/confidence.hpp"
#include "secret/embeddings.hpp"

#include <span>
#include <vector>

namespace secret {

enum class ForestMode { classifier, regressor };

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int depth = 0;
  int left = -1;
  int right = -1;
  /// Training samples reaching the node (bootstrap duplicates counted).
  int n_samples = 0;
  /// Per-class counts; classifier trees only.
  std::vector<double> class_histogram;
  /// Mean target; regressor trees only.
  Vector mean_output;

  bool is_leaf() const { return left < 0; }
};

class DecisionTree {
 public:
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  template <typename Row>
  const TreeNode& leaf_for(const Row& x) const {
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) {
      node = &nodes_[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left
                                                                                  : node->right)];
    }
    return *node;
  }
  int depth() const;
  std::size_t n_leaves() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct ForestParams {
  int n_trees = 100;
  /// 0 grows every tree to purity.
  int max_depth = 0;
  int min_samples_split = 2;
  /// 0 means ceil(sqrt(n_features)).
  int max_features = 0;
  /// Off only for tests that need a tree to see every training row once.
  bool bootstrap = true;
  int n_threads = 1;
};

class Forest {
 public:
  Forest(ForestMode mode, int n_features, int n_outputs, std::vector<DecisionTree> trees);

  ForestMode mode() const { return mode_; }
  int n_trees() const { return static_cast<int>(trees_.size()); }
  int n_features() const { return n_features_; }
  /// Class count for classifiers, target dimension for regressors.
  int n_outputs() const { return n_outputs_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  ForestMode mode_;
  int n_features_;
  int n_outputs_;
  std::vector<DecisionTree> trees_;
};

/// Gini-split random forest over bootstrap resamples.
Forest train_forest_classifier(const Matrix& X, std::span<const int> y, int n_classes,
                               const ForestParams& params, std::uint64_t seed);

/// Multi-output regression forest; splits minimize the summed per-output
/// squared error of the children.
Forest train_forest_regressor(const Matrix& X, const Matrix& targets, const ForestParams& params,
                              std::uint64_t seed);

/// Mean over trees of the leaf class fractions.
ConfidenceMatrix forest_classifier_confidence(const Forest& forest, const Matrix& X);

/// Mean over trees of the leaf mean targets.
Matrix forest_regressor_predict(const Forest& forest, const Matrix& X);

/// Class of the nearest label vector (squared Euclidean), ties to the lowest id.
int nearest_label(const Eigen::Ref<const Eigen::RowVectorXd>& output, const LabelVectorSet& vs);
std::vector<int> nearest_labels(const Matrix& outputs, const LabelVectorSet& vs);

/// Labels regressor predictions by their nearest label vector.
std::vector<int> regressor_as_classifier(const Forest& forest, const LabelVectorSet& vs,
                                         const Matrix& X);

}  // namespace secret
