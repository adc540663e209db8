#include "secret/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <thread>

namespace secret {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // larger is better
};

bool better(const Split& cand, const Split& best) {
  if (best.feature < 0) return true;
  const double tol = 1e-12 * std::max(1.0, std::abs(best.score));
  if (cand.score > best.score + tol) return true;
  if (cand.score < best.score - tol) return false;
  if (cand.feature != best.feature) return cand.feature < best.feature;
  return cand.threshold < best.threshold;
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid >= hi ? lo : mid;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, ForestMode mode, std::span<const int> y, int n_classes,
              const RowMajor* targets, const ForestParams& params, int max_features)
      : X_(X), mode_(mode), y_(y), n_classes_(n_classes), targets_(targets), params_(params),
        max_features_(max_features) {}

  DecisionTree build(std::vector<std::size_t> samples, Rng& rng) {
    samples_ = std::move(samples);
    nodes_.clear();
    grow(0, samples_.size(), 0, rng);
    return DecisionTree(std::move(nodes_));
  }

 private:
  int grow(std::size_t begin, std::size_t end, int depth, Rng& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      TreeNode& node = nodes_.back();
      node.depth = depth;
      node.n_samples = static_cast<int>(end - begin);
      if (mode_ == ForestMode::classifier) {
        node.class_histogram.assign(static_cast<std::size_t>(n_classes_), 0.0);
        for (auto i = begin; i < end; ++i) node.class_histogram[static_cast<std::size_t>(y_[samples_[i]])] += 1.0;
      }
    }
    const auto n = end - begin;
    const bool stop = is_pure(begin, end) || n < static_cast<std::size_t>(params_.min_samples_split) ||
                      (params_.max_depth > 0 && depth >= params_.max_depth);
    Split split;
    if (!stop) split = find_split(begin, end, rng);
    if (split.feature < 0) {
      make_leaf(id, begin, end);
      return id;
    }

    const auto mid_it = std::partition(
        samples_.begin() + static_cast<std::ptrdiff_t>(begin),
        samples_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t s) {
          return X_(static_cast<Eigen::Index>(s), split.feature) <= split.threshold;
        });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
    const int left = grow(begin, mid, depth + 1, rng);
    const int right = grow(mid, end, depth + 1, rng);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  bool is_pure(std::size_t begin, std::size_t end) const {
    const auto first = samples_[begin];
    for (auto i = begin + 1; i < end; ++i) {
      const auto s = samples_[i];
      if (mode_ == ForestMode::classifier) {
        if (y_[s] != y_[first]) return false;
      } else if (targets_->row(static_cast<Eigen::Index>(s)) !=
                 targets_->row(static_cast<Eigen::Index>(first))) {
        return false;
      }
    }
    return true;
  }

  void make_leaf(int id, std::size_t begin, std::size_t end) {
    if (mode_ != ForestMode::regressor) return;
    // first + mean of offsets: exact when every target in the leaf is equal.
    const Eigen::RowVectorXd first = targets_->row(static_cast<Eigen::Index>(samples_[begin]));
    Eigen::RowVectorXd offset = Eigen::RowVectorXd::Zero(first.size());
    for (auto i = begin + 1; i < end; ++i) {
      offset += targets_->row(static_cast<Eigen::Index>(samples_[i])) - first;
    }
    nodes_[static_cast<std::size_t>(id)].mean_output =
        (first + offset / static_cast<double>(end - begin)).transpose();
  }

  Split find_split(std::size_t begin, std::size_t end, Rng& rng) {
    const int p = static_cast<int>(X_.cols());
    std::vector<int> features(static_cast<std::size_t>(p));
    std::iota(features.begin(), features.end(), 0);
    rng.shuffle(features);

    Split best;
    int visited = 0;
    for (int f : features) {
      if (visited >= max_features_) break;
      order_.clear();
      for (auto i = begin; i < end; ++i) {
        order_.emplace_back(X_(static_cast<Eigen::Index>(samples_[i]), f), samples_[i]);
      }
      std::sort(order_.begin(), order_.end());
      if (order_.front().first == order_.back().first) continue;  // constant: not counted
      ++visited;
      if (mode_ == ForestMode::classifier) {
        sweep_gini(f, best);
      } else {
        sweep_variance(f, best);
      }
    }
    return best;
  }

  // Maximizes sum_c L_c^2 / n_L + sum_c R_c^2 / n_R, which minimizes the
  // weighted Gini impurity of the children.
  void sweep_gini(int feature, Split& best) {
    const auto n = order_.size();
    std::vector<double> total(static_cast<std::size_t>(n_classes_), 0.0);
    for (const auto& [x, s] : order_) total[static_cast<std::size_t>(y_[s])] += 1.0;
    std::vector<double> left(total.size(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[static_cast<std::size_t>(y_[order_[i].second])] += 1.0;
      if (!(order_[i].first < order_[i + 1].first)) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      double sl = 0.0, sr = 0.0;
      for (std::size_t c = 0; c < total.size(); ++c) {
        sl += left[c] * left[c];
        const double r = total[c] - left[c];
        sr += r * r;
      }
      Split cand{feature, midpoint(order_[i].first, order_[i + 1].first), sl / nl + sr / nr};
      if (better(cand, best)) best = cand;
    }
  }

  // Maximizes |sum_L|^2 / n_L + |sum_R|^2 / n_R, which minimizes the summed
  // per-output squared error of the children.
  void sweep_variance(int feature, Split& best) {
    const auto n = order_.size();
    const auto d = targets_->cols();
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(d);
    for (const auto& [x, s] : order_) total += targets_->row(static_cast<Eigen::Index>(s));
    Eigen::RowVectorXd left = Eigen::RowVectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += targets_->row(static_cast<Eigen::Index>(order_[i].second));
      if (!(order_[i].first < order_[i + 1].first)) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      const double score = left.squaredNorm() / nl + (total - left).squaredNorm() / nr;
      Split cand{feature, midpoint(order_[i].first, order_[i + 1].first), score};
      if (better(cand, best)) best = cand;
    }
  }

  const Matrix& X_;
  ForestMode mode_;
  std::span<const int> y_;
  int n_classes_;
  const RowMajor* targets_;
  const ForestParams& params_;
  int max_features_;
  std::vector<std::size_t> samples_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, std::size_t>> order_;
};

int resolve_max_features(const ForestParams& params, int p) {
  if (params.max_features > 0) return std::min(params.max_features, p);
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));
}

std::vector<DecisionTree> grow_trees(const Matrix& X, ForestMode mode, std::span<const int> y,
                                     int n_classes, const RowMajor* targets,
                                     const ForestParams& params, std::uint64_t seed) {
  require(params.n_trees >= 1, "forest: n_trees must be at least 1");
  require(X.rows() > 0, "forest: empty training set");
  require(X.cols() > 0, "forest: no features");
  const auto n = static_cast<std::size_t>(X.rows());
  const int max_features = resolve_max_features(params, static_cast<int>(X.cols()));

  std::vector<std::optional<DecisionTree>> slots(static_cast<std::size_t>(params.n_trees));
  auto work = [&](int worker, int n_workers) {
    TreeBuilder builder(X, mode, y, n_classes, targets, params, max_features);
    for (int t = worker; t < params.n_trees; t += n_workers) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
      std::vector<std::size_t> samples(n);
      if (params.bootstrap) {
        for (auto& s : samples) s = rng.index(n);
      } else {
        std::iota(samples.begin(), samples.end(), std::size_t{0});
      }
      slots[static_cast<std::size_t>(t)] = builder.build(std::move(samples), rng);
    }
  };
  const int n_workers = std::clamp(params.n_threads, 1, params.n_trees);
  if (n_workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w, n_workers);
  }
  std::vector<DecisionTree> trees;
  trees.reserve(slots.size());
  for (auto& slot : slots) trees.push_back(std::move(*slot));
  return trees;
}

void check_arity(const Forest& forest, const Matrix& X) {
  if (X.cols() != forest.n_features()) {
    fail(ErrorCode::invalid_argument, "forest expects " + std::to_string(forest.n_features()) +
                                          " features, got " + std::to_string(X.cols()));
  }
}

}  // namespace

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& node : nodes_) d = std::max(d, node.depth);
  return d;
}

std::size_t DecisionTree::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Forest::Forest(ForestMode mode, int n_features, int n_outputs, std::vector<DecisionTree> trees)
    : mode_(mode), n_features_(n_features), n_outputs_(n_outputs), trees_(std::move(trees)) {
  require(!trees_.empty(), "forest needs at least one tree");
}

Forest train_forest_classifier(const Matrix& X, std::span<const int> y, int n_classes,
                               const ForestParams& params, std::uint64_t seed) {
  require(static_cast<std::size_t>(X.rows()) == y.size(), "forest: X rows and y length differ");
  require(n_classes >= 1, "forest: n_classes must be positive");
  for (int c : y) require(c >= 0 && c < n_classes, "forest: class id out of range");
  auto trees = grow_trees(X, ForestMode::classifier, y, n_classes, nullptr, params, seed);
  return Forest(ForestMode::classifier, static_cast<int>(X.cols()), n_classes, std::move(trees));
}

Forest train_forest_regressor(const Matrix& X, const Matrix& targets, const ForestParams& params,
                              std::uint64_t seed) {
  require(targets.rows() == X.rows(), "forest: target rows differ from X rows");
  require(targets.cols() > 0, "forest: target dimension must be positive");
  const RowMajor t = targets;
  auto trees = grow_trees(X, ForestMode::regressor, {}, 0, &t, params, seed);
  return Forest(ForestMode::regressor, static_cast<int>(X.cols()), static_cast<int>(targets.cols()),
                std::move(trees));
}

ConfidenceMatrix forest_classifier_confidence(const Forest& forest, const Matrix& X) {
  require(forest.mode() == ForestMode::classifier, "forest is not a classifier");
  check_arity(forest, X);
  Matrix scores = Matrix::Zero(X.rows(), forest.n_outputs());
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const Eigen::RowVectorXd x = X.row(j);
    for (const auto& tree : forest.trees()) {
      const auto& leaf = tree.leaf_for(x);
      const double total = static_cast<double>(leaf.n_samples);
      for (int k = 0; k < forest.n_outputs(); ++k) {
        scores(j, k) += leaf.class_histogram[static_cast<std::size_t>(k)] / total;
      }
    }
  }
  scores /= static_cast<double>(forest.n_trees());
  return ConfidenceMatrix(std::move(scores));
}

Matrix forest_regressor_predict(const Forest& forest, const Matrix& X) {
  require(forest.mode() == ForestMode::regressor, "forest is not a regressor");
  check_arity(forest, X);
  Matrix out(X.rows(), forest.n_outputs());
  const double n_trees = static_cast<double>(forest.n_trees());
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const Eigen::RowVectorXd x = X.row(j);
    const auto& trees = forest.trees();
    const Vector& first = trees.front().leaf_for(x).mean_output;
    Vector offset = Vector::Zero(first.size());
    for (std::size_t t = 1; t < trees.size(); ++t) offset += trees[t].leaf_for(x).mean_output - first;
    out.row(j) = (first + offset / n_trees).transpose();
  }
  return out;
}

int nearest_label(const Eigen::Ref<const Eigen::RowVectorXd>& output, const LabelVectorSet& vs) {
  require(output.size() == vs.dim(), "prediction dimension differs from label vector dimension");
  int best = 0;
  double best_d = (vs.V.row(0) - output).squaredNorm();
  for (int k = 1; k < vs.n_classes(); ++k) {
    const double d = (vs.V.row(k) - output).squaredNorm();
    if (d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

std::vector<int> nearest_labels(const Matrix& outputs, const LabelVectorSet& vs) {
  std::vector<int> labels(static_cast<std::size_t>(outputs.rows()));
  for (Eigen::Index j = 0; j < outputs.rows(); ++j) {
    labels[static_cast<std::size_t>(j)] = nearest_label(outputs.row(j), vs);
  }
  return labels;
}

std::vector<int> regressor_as_classifier(const Forest& forest, const LabelVectorSet& vs,
                                         const Matrix& X) {
  require(forest.n_outputs() == vs.dim(), "forest output dimension differs from label vectors");
  return nearest_labels(forest_regressor_predict(forest, X), vs);
}

}  // namespace secret
