#include "secret/analysis.hpp"

#include <algorithm>

namespace secret {
namespace {

std::vector<double> pooled(std::span<const DepthReport> reports) {
  std::vector<double> values;
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.per_class_avg_depth.size(); ++k) {
      if (r.present[k]) values.push_back(r.per_class_avg_depth[k]);
    }
  }
  return values;
}

}  // namespace

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

DepthReport node_depth_stats(const Forest& forest, int n_classes, const LabelVectorSet* vectors) {
  require(n_classes >= 1, "node_depth_stats: need at least one class");
  const bool regressor = forest.mode() == ForestMode::regressor;
  if (regressor) {
    require(vectors != nullptr, "node_depth_stats: regressor forests need label vectors");
    require(vectors->n_classes() == n_classes, "node_depth_stats: label vector count differs from class count");
  }
  const auto C = static_cast<std::size_t>(n_classes);
  DepthReport report;
  report.n_trees = forest.n_trees();
  std::vector<double> tree_mean_sum(C, 0.0);
  std::vector<int> trees_with_class(C, 0);

  std::vector<double> depth_sum(C);
  std::vector<int> leaf_count(C);
  for (const auto& tree : forest.trees()) {
    std::fill(depth_sum.begin(), depth_sum.end(), 0.0);
    std::fill(leaf_count.begin(), leaf_count.end(), 0);
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) continue;
      const int k = regressor ? nearest_label(node.mean_output.transpose(), *vectors)
                              : argmax_lowest(node.class_histogram);
      depth_sum[static_cast<std::size_t>(k)] += node.depth;
      ++leaf_count[static_cast<std::size_t>(k)];
    }
    for (std::size_t k = 0; k < C; ++k) {
      if (leaf_count[k] == 0) continue;
      tree_mean_sum[k] += depth_sum[k] / leaf_count[k];
      ++trees_with_class[k];
    }
  }

  report.per_class_avg_depth.assign(C, 0.0);
  report.present.assign(C, false);
  std::vector<double> present_values;
  for (std::size_t k = 0; k < C; ++k) {
    if (trees_with_class[k] == 0) {
      report.warnings.push_back("class " + std::to_string(k) +
                                " is assigned by no leaf; left out of the depth variance");
      continue;
    }
    report.present[k] = true;
    report.per_class_avg_depth[k] = tree_mean_sum[k] / trees_with_class[k];
    present_values.push_back(report.per_class_avg_depth[k]);
  }
  report.overall_variance = sample_variance(present_values);
  return report;
}

DepthComparison compare_depth_variance(std::span<const DepthReport> traditional,
                                       std::span<const DepthReport> secret) {
  if (traditional.size() != secret.size()) {
    fail(ErrorCode::invalid_argument, "compare_depth_variance: " + std::to_string(traditional.size()) +
                                          " traditional folds vs " + std::to_string(secret.size()) +
                                          " SECRET folds");
  }
  DepthComparison out;
  out.n_folds = static_cast<int>(traditional.size());
  for (std::size_t i = 0; i < traditional.size(); ++i) {
    const auto& t = traditional[i];
    const auto it = std::find_if(secret.begin(), secret.end(), [&](const auto& s) { return s.fold == t.fold; });
    if (it == secret.end()) {
      fail(ErrorCode::invalid_argument,
           "compare_depth_variance: fold " + std::to_string(t.fold) + " has no SECRET counterpart");
    }
    out.traditional_mean_variance += t.overall_variance;
    out.secret_mean_variance += it->overall_variance;
    if (it->overall_variance > t.overall_variance) {
      ++out.secret_larger;
    } else if (it->overall_variance < t.overall_variance) {
      ++out.traditional_larger;
    } else {
      ++out.equal;
    }
  }
  if (out.n_folds > 0) {
    out.traditional_mean_variance /= out.n_folds;
    out.secret_mean_variance /= out.n_folds;
  }
  const auto tp = pooled(traditional), sp = pooled(secret);
  out.traditional_pooled_variance = sample_variance(tp);
  out.secret_pooled_variance = sample_variance(sp);
  return out;
}

}  // namespace secret
