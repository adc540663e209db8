#include "secret/forest.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace secret;
using secret::testing::RootSplit;

namespace {

ForestParams single_tree() {
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  return p;
}

TreeNode leaf(std::vector<double> histogram) {
  TreeNode n;
  n.class_histogram = std::move(histogram);
  for (double c : n.class_histogram) n.n_samples += static_cast<int>(c);
  return n;
}

TreeNode regression_leaf(Vector mean) {
  TreeNode n;
  n.n_samples = 1;
  n.mean_output = std::move(mean);
  return n;
}

void check_depths(const DecisionTree& tree) {
  const auto& nodes = tree.nodes();
  CHECK(nodes.front().depth == 0);
  for (const auto& n : nodes) {
    if (n.is_leaf()) continue;
    REQUIRE(n.right >= 0);
    CHECK(nodes[static_cast<std::size_t>(n.left)].depth == n.depth + 1);
    CHECK(nodes[static_cast<std::size_t>(n.right)].depth == n.depth + 1);
  }
}

bool same_forest(const Forest& a, const Forest& b) {
  if (a.n_trees() != b.n_trees()) return false;
  for (int t = 0; t < a.n_trees(); ++t) {
    const auto& na = a.trees()[static_cast<std::size_t>(t)].nodes();
    const auto& nb = b.trees()[static_cast<std::size_t>(t)].nodes();
    if (na.size() != nb.size()) return false;
    for (std::size_t i = 0; i < na.size(); ++i) {
      if (na[i].feature != nb[i].feature || na[i].threshold != nb[i].threshold ||
          na[i].left != nb[i].left || na[i].class_histogram != nb[i].class_histogram) {
        return false;
      }
      if (na[i].mean_output.size() != nb[i].mean_output.size() || na[i].mean_output != nb[i].mean_output) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("root split matches exhaustive search on every tiny binary dataset") {
  std::size_t mismatches = 0;
  const auto visited = secret::testing::for_each_tiny_dataset(8, [&](const Matrix& X, const std::vector<int>& y) {
    const RootSplit expected = secret::testing::root_split_oracle(X, y, 2);
    const auto forest = train_forest_classifier(X, y, 2, single_tree(), 3);
    const auto& root = forest.trees().front().root();
    const bool ok = expected.leaf ? root.is_leaf()
                                  : (!root.is_leaf() && root.feature == expected.feature &&
                                     root.threshold == doctest::Approx(expected.threshold));
    if (!ok) ++mismatches;
  });
  CHECK(visited == 12869);
  CHECK(mismatches == 0);
}

TEST_CASE("single-class training data gives pure single-leaf trees") {
  Matrix X = Matrix::Random(20, 3);
  std::vector<int> y(20, 1);
  ForestParams p;
  p.n_trees = 5;
  const auto f = train_forest_classifier(X, y, 3, p, 11);
  for (const auto& t : f.trees()) CHECK(t.nodes().size() == 1);
  const auto conf = forest_classifier_confidence(f, Matrix::Random(4, 3));
  for (Eigen::Index i = 0; i < conf.rows(); ++i) {
    CHECK(conf.scores(i, 1) == doctest::Approx(1.0));
    CHECK(conf.scores(i, 0) == 0.0);
  }
}

TEST_CASE("separable one-feature data is fit perfectly") {
  Matrix X(8, 1);
  X << 0.1, 0.4, 0.2, 0.3, 2.0, 2.5, 3.0, 2.2;
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  // A perfect threshold exists anywhere in (0.4, 2.0).
  const auto f = train_forest_classifier(X, y, 2, single_tree(), 5);
  const auto conf = forest_classifier_confidence(f, X);
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(argmax_lowest(conf.scores.row(i)) == y[static_cast<std::size_t>(i)]);
  const auto& root = f.trees().front().root();
  CHECK(root.threshold > 0.4);
  CHECK(root.threshold < 2.0);
}

TEST_CASE("training is deterministic and thread count does not change the forest") {
  const auto table = secret::testing::three_class_table({});
  const auto data = preprocess(table);
  ForestParams p;
  p.n_trees = 12;
  const auto a = train_forest_classifier(data.X, data.y, 3, p, 99);
  const auto b = train_forest_classifier(data.X, data.y, 3, p, 99);
  CHECK(same_forest(a, b));
  p.n_threads = 3;
  const auto c = train_forest_classifier(data.X, data.y, 3, p, 99);
  CHECK(same_forest(a, c));
  const auto d = train_forest_classifier(data.X, data.y, 3, ForestParams{12}, 100);
  CHECK_FALSE(same_forest(a, d));
}

TEST_CASE("confidence is the mean of leaf class fractions") {
  SUBCASE("one tree") {
    Forest f(ForestMode::classifier, 1, 2, {DecisionTree({leaf({3, 1})})});
    const auto conf = forest_classifier_confidence(f, Matrix::Zero(1, 1));
    CHECK(conf.scores(0, 0) == doctest::Approx(0.75));
    CHECK(conf.scores(0, 1) == doctest::Approx(0.25));
  }
  SUBCASE("two trees") {
    Forest f(ForestMode::classifier, 1, 2, {DecisionTree({leaf({4, 0})}), DecisionTree({leaf({1, 1})})});
    const auto conf = forest_classifier_confidence(f, Matrix::Zero(1, 1));
    CHECK(conf.scores(0, 0) == doctest::Approx(0.75));
    CHECK(conf.scores(0, 1) == doctest::Approx(0.25));
  }
  SUBCASE("rows are probability vectors") {
    const auto table = secret::testing::three_class_table({.overlap_shift = 0.5});
    const auto data = preprocess(table);
    const auto f = train_forest_classifier(data.X, data.y, 3, ForestParams{15}, 4);
    const auto conf = forest_classifier_confidence(f, Matrix::Random(50, data.X.cols()) * 5.0);
    for (Eigen::Index i = 0; i < conf.rows(); ++i) {
      CHECK(conf.scores.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(conf.scores.row(i).minCoeff() >= 0.0);
      CHECK(conf.scores.row(i).maxCoeff() <= 1.0);
    }
  }
  SUBCASE("feature arity mismatch") {
    Forest f(ForestMode::classifier, 2, 2, {DecisionTree({leaf({1, 1})})});
    CHECK_THROWS_AS(forest_classifier_confidence(f, Matrix::Zero(1, 3)), Error);
  }
}

TEST_CASE("fully grown tree reproduces its duplicate-free training labels") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 30;
    Matrix X(n, 3);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform() + i * 1e-3;
      y.push_back(static_cast<int>(rng.uniform() * 4.0) % 4);
    }
    const auto f = train_forest_classifier(X, y, 4, single_tree(), seed);
    const auto conf = forest_classifier_confidence(f, X);
    for (int i = 0; i < n; ++i) CHECK(argmax_lowest(conf.scores.row(i)) == y[static_cast<std::size_t>(i)]);
    check_depths(f.trees().front());
  }
}

TEST_CASE("depth bookkeeping holds in bootstrap forests") {
  const auto data = preprocess(secret::testing::three_class_table({}));
  const auto f = train_forest_classifier(data.X, data.y, 3, ForestParams{10}, 8);
  for (const auto& t : f.trees()) check_depths(t);
  const Matrix T = Matrix::Random(data.X.rows(), 4);
  const auto r = train_forest_regressor(data.X, T, ForestParams{10}, 8);
  for (const auto& t : r.trees()) check_depths(t);
}

TEST_CASE("regressor examples") {
  SUBCASE("constant targets") {
    Matrix X = Matrix::Random(15, 2);
    Matrix T(15, 3);
    T.rowwise() = Eigen::RowVector3d(1.5, -2.0, 0.25);
    const auto f = train_forest_regressor(X, T, ForestParams{4}, 2);
    const auto out = forest_regressor_predict(f, Matrix::Random(5, 2));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK((out.row(i) - T.row(0)).norm() < 1e-12);
  }
  SUBCASE("one instance") {
    Matrix X(1, 2);
    X << 1, 2;
    Matrix T(1, 2);
    T << 3, 4;
    const auto f = train_forest_regressor(X, T, ForestParams{3}, 1);
    for (const auto& t : f.trees()) CHECK(t.nodes().size() == 1);
    CHECK((forest_regressor_predict(f, X) - T).norm() < 1e-12);
  }
  SUBCASE("two clusters predict their own means") {
    Matrix X(8, 1);
    X << 0.0, 0.1, 0.2, 0.3, 5.0, 5.1, 5.2, 5.3;
    Matrix T(8, 2);
    T << 1, 1, 1, 1, 1, 1, 1, 1, 4, 0, 4, 0, 4, 0, 4, 0;
    const auto f = train_forest_regressor(X, T, single_tree(), 6);
    const auto out = forest_regressor_predict(f, X);
    for (Eigen::Index i = 0; i < 8; ++i) CHECK((out.row(i) - T.row(i)).norm() < 1e-9);
  }
  SUBCASE("training points are reproduced by a fully grown tree") {
    Matrix X = Matrix::Random(25, 3);
    Matrix T = Matrix::Random(25, 2);
    const auto f = train_forest_regressor(X, T, single_tree(), 6);
    CHECK((forest_regressor_predict(f, X) - T).norm() < 1e-9);
  }
  SUBCASE("averaging two trees") {
    Forest f(ForestMode::regressor, 1, 2,
             {DecisionTree({regression_leaf(Vector::Zero(2))}), DecisionTree({regression_leaf(Vector::Constant(2, 2.0))})});
    const auto out = forest_regressor_predict(f, Matrix::Zero(3, 1));
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(out(i, 0) == doctest::Approx(1.0));
      CHECK(out(i, 1) == doctest::Approx(1.0));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(train_forest_regressor(Matrix(0, 2), Matrix(0, 2), ForestParams{}, 1), Error);
    CHECK_THROWS_AS(train_forest_regressor(Matrix::Zero(3, 2), Matrix(3, 0), ForestParams{}, 1), Error);
    CHECK_THROWS_AS(train_forest_regressor(Matrix::Zero(3, 2), Matrix::Zero(2, 2), ForestParams{}, 1), Error);
    CHECK_THROWS_AS(train_forest_classifier(Matrix(0, 2), std::vector<int>{}, 2, ForestParams{}, 1), Error);
  }
}

TEST_CASE("nearest label vector") {
  LabelVectorSet vs;
  vs.V.resize(2, 2);
  vs.V << 0, 0, 3, 3;
  Eigen::RowVectorXd p(2);
  p << 1, 1;
  CHECK(nearest_label(p, vs) == 0);
  p << 3, 3;
  CHECK(nearest_label(p, vs) == 1);

  LabelVectorSet three;
  three.V.resize(3, 1);
  three.V << -1, 5, 1;
  Eigen::RowVectorXd mid(1);
  mid << 0.0;
  CHECK(nearest_label(mid, three) == 0);

  Eigen::RowVectorXd wrong(3);
  wrong << 0, 0, 0;
  CHECK_THROWS_AS(nearest_label(wrong, vs), Error);

  Matrix X(2, 1);
  X << 0.0, 10.0;
  Matrix T(2, 2);
  T << 0, 0, 3, 3;
  const auto f = train_forest_regressor(X, T, single_tree(), 1);
  CHECK(regressor_as_classifier(f, vs, X) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(regressor_as_classifier(f, three, X), Error);
}
