#include "secret/analysis.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace secret;

namespace {

TreeNode node(int depth, std::vector<double> histogram = {}) {
  TreeNode n;
  n.depth = depth;
  n.class_histogram = std::move(histogram);
  for (double c : n.class_histogram) n.n_samples += static_cast<int>(c);
  return n;
}

// Root split into two leaves.
DecisionTree stump(std::vector<double> left, std::vector<double> right) {
  auto root = node(0);
  root.feature = 0;
  root.left = 1;
  root.right = 2;
  return DecisionTree({root, node(1, std::move(left)), node(1, std::move(right))});
}

DepthReport report(int fold, double variance, std::vector<double> avg) {
  DepthReport r;
  r.fold = fold;
  r.overall_variance = variance;
  r.present.assign(avg.size(), true);
  r.per_class_avg_depth = std::move(avg);
  return r;
}

}  // namespace

TEST_CASE("sample variance") {
  const std::vector<double> v{11.6, 12.4, 12.4};
  CHECK(sample_variance(v) == doctest::Approx(0.64 / 3.0));
  CHECK(sample_variance(v) == doctest::Approx(0.21333).epsilon(1e-4));
  CHECK(sample_variance(std::vector<double>{3.0}) == 0.0);
  CHECK(sample_variance(std::vector<double>{}) == 0.0);
}

TEST_CASE("depth statistics on hand-built forests") {
  SUBCASE("single root leaf") {
    Forest f(ForestMode::classifier, 1, 1, {DecisionTree({node(0, {4})})});
    const auto r = node_depth_stats(f, 1);
    CHECK(r.per_class_avg_depth == std::vector<double>{0.0});
    CHECK(r.overall_variance == 0.0);
    CHECK(r.n_trees == 1);
  }
  SUBCASE("stump") {
    Forest f(ForestMode::classifier, 1, 2, {stump({3, 0}, {0, 2})});
    const auto r = node_depth_stats(f, 2);
    CHECK(r.per_class_avg_depth == std::vector<double>{1.0, 1.0});
    CHECK(r.overall_variance == 0.0);
  }
  SUBCASE("class means are averaged over the trees that have the class") {
    // Tree 2: class 0 at depths 1 and 2, class 1 at depth 2.
    auto root = node(0);
    root.left = 1;
    root.right = 2;
    auto inner = node(1);
    inner.left = 3;
    inner.right = 4;
    DecisionTree deep({root, inner, node(1, {5, 0}), node(2, {2, 1}), node(2, {0, 3})});
    Forest f(ForestMode::classifier, 1, 3, {stump({3, 0, 0}, {0, 0, 2}), deep});
    const auto r = node_depth_stats(f, 3);
    CHECK(r.per_class_avg_depth[0] == doctest::Approx((1.0 + 1.5) / 2.0));
    CHECK(r.per_class_avg_depth[1] == doctest::Approx(2.0));
    CHECK(r.per_class_avg_depth[2] == doctest::Approx(1.0));
    CHECK(r.overall_variance == doctest::Approx(sample_variance(r.per_class_avg_depth)));
  }
  SUBCASE("absent classes are excluded with a warning") {
    Forest f(ForestMode::classifier, 1, 3, {stump({3, 0, 0}, {0, 1, 0})});
    const auto r = node_depth_stats(f, 3);
    CHECK(r.present == std::vector<bool>{true, true, false});
    CHECK(r.overall_variance == 0.0);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("regressor leaves take the nearest label vector") {
    auto root = node(0);
    root.left = 1;
    root.right = 2;
    auto a = node(1);
    a.n_samples = 1;
    a.mean_output = Vector::Constant(1, 0.2);
    auto b = node(1);
    b.n_samples = 1;
    b.mean_output = Vector::Constant(1, 0.9);
    Forest f(ForestMode::regressor, 1, 1, {DecisionTree({root, a, b})});
    LabelVectorSet vs;
    vs.V.resize(2, 1);
    vs.V << 0.0, 1.0;
    const auto r = node_depth_stats(f, 2, &vs);
    CHECK(r.per_class_avg_depth == std::vector<double>{1.0, 1.0});
    CHECK_THROWS_AS(node_depth_stats(f, 2), Error);
  }
}

TEST_CASE("trained forests") {
  const auto data = preprocess(secret::testing::three_class_table({}));
  ForestParams p;
  p.n_trees = 1;
  const auto one = train_forest_classifier(data.X, data.y, 3, p, 4);
  const Forest many(ForestMode::classifier, one.n_features(), 3,
                    std::vector<DecisionTree>(6, one.trees().front()));
  const auto a = node_depth_stats(one, 3);
  const auto b = node_depth_stats(many, 3);
  CHECK(a.per_class_avg_depth == b.per_class_avg_depth);
  CHECK(a.overall_variance == b.overall_variance);

  p.n_trees = 8;
  const auto forest = train_forest_classifier(data.X, data.y, 3, p, 5);
  int deepest = 0;
  for (const auto& t : forest.trees()) deepest = std::max(deepest, t.depth());
  const auto r = node_depth_stats(forest, 3);
  for (double d : r.per_class_avg_depth) {
    CHECK(d >= 0.0);
    CHECK(d <= deepest);
  }
  CHECK(r.overall_variance >= 0.0);
}

TEST_CASE("comparing depth variance across folds") {
  SUBCASE("larger semantic variance is flagged") {
    const std::vector<DepthReport> trad{report(0, 0.2, {1, 2})};
    const std::vector<DepthReport> sec{report(0, 0.4, {1, 3})};
    const auto c = compare_depth_variance(trad, sec);
    CHECK(c.n_folds == 1);
    CHECK(c.secret_larger == 1);
    CHECK(c.traditional_larger == 0);
    CHECK(c.secret_mean_variance == doctest::Approx(0.4));
    CHECK(c.traditional_mean_variance == doctest::Approx(0.2));
  }
  SUBCASE("identical sides") {
    const std::vector<DepthReport> side{report(0, 0.3, {1, 2}), report(1, 0.5, {2, 2})};
    const auto c = compare_depth_variance(side, side);
    CHECK(c.equal == 2);
    CHECK(c.secret_mean_variance == c.traditional_mean_variance);
    CHECK(c.secret_pooled_variance == c.traditional_pooled_variance);
    CHECK(c.traditional_pooled_variance == doctest::Approx(sample_variance(std::vector<double>{1, 2, 2, 2})));
  }
  SUBCASE("fold mismatch") {
    const std::vector<DepthReport> a{report(0, 0.1, {1})};
    const std::vector<DepthReport> b{report(1, 0.1, {1})};
    CHECK_THROWS_AS(compare_depth_variance(a, b), Error);
    const std::vector<DepthReport> two{report(0, 0.1, {1}), report(1, 0.1, {1})};
    CHECK_THROWS_AS(compare_depth_variance(a, two), Error);
  }
}
