#include "secret/dataset.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace secret;

namespace {

const std::vector<ColumnKind> kSchema{ColumnKind::numeric, ColumnKind::categorical, ColumnKind::label};

RawTable parse(const std::string& text, const std::vector<ColumnKind>& schema = kSchema, CsvOptions opts = {}) {
  std::istringstream in(text);
  return parse_csv(in, schema, opts);
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

std::vector<int> labels_of(std::size_t n, int classes) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>((i * 7 + i / 3) % static_cast<std::size_t>(classes));
  return y;
}

}  // namespace

TEST_CASE("csv parsing handles quotes, blank lines and headers") {
  const auto t = parse("a,h,label\n1.5,\"x,y\",yes\n\n-2,z,no\n", kSchema, {',', true});
  REQUIRE(t.size() == 2);
  CHECK(t.column_names == std::vector<std::string>{"a", "h", "label"});
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.label_column() == 2);
}

TEST_CASE("csv parsing rejects malformed input") {
  CHECK(code_of([] { parse("1,a\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse("abc,a,yes\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse("nan,a,yes\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse("1,a,\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse("a,b\n1,a,yes\n", kSchema, {',', true}); }) == ErrorCode::parse);
  CHECK(code_of([] { parse("1,a,b\n", {ColumnKind::numeric, ColumnKind::label, ColumnKind::label}); }) ==
        ErrorCode::config);
  CHECK(code_of([] { load_csv("/nonexistent/file.csv", kSchema); }) == ErrorCode::io);
  CHECK(code_of([] { parse_column_kind("weird"); }) == ErrorCode::config);
}

TEST_CASE("label ids follow sorted label values, not row order") {
  const auto t = parse("1,a,zeta\n2,a,alpha\n3,b,mid\n");
  const auto enc = LabelEncoding::from_table(t);
  CHECK(enc.labels() == std::vector<std::string>{"alpha", "mid", "zeta"});
  CHECK(enc.encode(t) == std::vector<int>{2, 0, 1});
  CHECK_THROWS_AS(enc.id("missing"), Error);
}

TEST_CASE("standardized numeric columns have mean 0 and population sd 1") {
  testing::ThreeClassSpec spec;
  spec.per_class = 40;
  const auto t = testing::three_class_table(spec);
  const auto ds = preprocess(t);
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
    const double mean = ds.X.col(j).mean();
    const double sd = std::sqrt((ds.X.col(j).array() - mean).square().mean());
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("categorical columns are one-hot encoded in sorted category order") {
  const auto t = parse("1,red,y\n2,blue,n\n3,red,y\n");
  std::vector<std::string> warnings;
  const auto ds = preprocess(t, {}, &warnings);
  REQUIRE(ds.X.cols() == 3);
  // Columns: a, h=blue, h=red.
  CHECK(ds.X(0, 1) == 0.0);
  CHECK(ds.X(0, 2) == 1.0);
  CHECK(ds.X(1, 1) == 1.0);
  const auto enc = FeatureEncoder::fit(t, std::vector<std::size_t>{0, 1, 2});
  CHECK(enc.feature_names() == std::vector<std::string>{"c0", "c1=blue", "c1=red"});
}

TEST_CASE("zero-variance columns encode as zeros with a warning") {
  const auto t = parse("5,a,y\n5,b,n\n5,a,y\n");
  std::vector<std::string> warnings;
  const auto ds = preprocess(t, {}, &warnings);
  CHECK(ds.X.col(0).isZero());
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("zero variance") != std::string::npos);
}

TEST_CASE("unseen categories encode as zeros with a warning") {
  const auto t = parse("1,a,y\n2,b,n\n3,c,y\n");
  const std::vector<std::size_t> fit{0, 1}, apply{2};
  std::vector<std::string> warnings;
  const auto ds = preprocess_rows(t, LabelEncoding::from_table(t), fit, apply, {}, &warnings);
  CHECK(ds.X.block(0, 1, 1, 2).isZero());
  CHECK(warnings.size() == 1);
}

TEST_CASE("stratified k-fold partitions every index exactly once") {
  for (int k : {2, 3, 5, 10}) {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto y = labels_of(137, 3);
      const auto plan = stratified_kfold(y, 3, k, seed);
      REQUIRE(plan.folds.size() == static_cast<std::size_t>(k));
      std::vector<int> seen(y.size(), 0);
      for (const auto& f : plan.folds) {
        CHECK(f.train.size() + f.test.size() == y.size());
        std::set<std::size_t> tr(f.train.begin(), f.train.end());
        for (auto i : f.test) {
          ++seen[i];
          CHECK(!tr.count(i));
        }
      }
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      // Per-class test counts differ by at most one across folds.
      for (int c = 0; c < 3; ++c) {
        std::vector<long> counts;
        for (const auto& f : plan.folds) {
          counts.push_back(std::count_if(f.test.begin(), f.test.end(), [&](auto i) { return y[i] == c; }));
        }
        CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
      }
    }
  }
}

TEST_CASE("stratified k-fold is deterministic and seed-dependent") {
  const auto y = labels_of(60, 2);
  const auto a = stratified_kfold(y, 2, 5, 7), b = stratified_kfold(y, 2, 5, 7), c = stratified_kfold(y, 2, 5, 8);
  CHECK(a.folds[0].test == b.folds[0].test);
  CHECK(hash_indices(a.folds[0].test) == hash_indices(b.folds[0].test));
  bool differs = false;
  for (std::size_t i = 0; i < a.folds.size(); ++i) differs |= a.folds[i].test != c.folds[i].test;
  CHECK(differs);
}

TEST_CASE("stratified k-fold rejects infeasible requests") {
  const std::vector<int> y{0, 0, 0, 1, 1};
  CHECK_THROWS_AS(stratified_kfold(y, 2, 1, 0), Error);
  CHECK_THROWS_AS(stratified_kfold(y, 2, 3, 0), Error);
  CHECK_NOTHROW(stratified_kfold(y, 2, 2, 0));
}

TEST_CASE("train/validation split keeps every class on both sides") {
  const auto y = labels_of(50, 3);
  std::vector<std::size_t> idx(50);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto [train, val] = train_val_split(idx, y, 3, 0.2, 4);
  CHECK(train.size() + val.size() == 50);
  CHECK(std::is_sorted(train.begin(), train.end()));
  for (int c = 0; c < 3; ++c) {
    CHECK(std::any_of(train.begin(), train.end(), [&](auto i) { return y[i] == c; }));
    CHECK(std::any_of(val.begin(), val.end(), [&](auto i) { return y[i] == c; }));
  }
  const std::vector<int> lonely{0, 0, 1};
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK_THROWS_AS(train_val_split(all, lonely, 2, 0.5, 0), Error);
}

TEST_CASE("prepare_fold fits the tuning encoder on train rows only") {
  testing::ThreeClassSpec spec;
  spec.per_class = 30;
  const auto t = testing::three_class_table(spec);
  const auto labels = LabelEncoding::from_table(t);
  const auto plan = stratified_kfold(labels.encode(t), labels.n_classes(), 5, 3);
  const auto fd = prepare_fold(t, labels, plan.folds[0], 0.25, 11);
  CHECK(fd.train.size() + fd.validation.size() == fd.trainval.size());
  CHECK(fd.test.size() == plan.folds[0].test.size());
  for (Eigen::Index j = 0; j < fd.train.X.cols(); ++j) {
    CHECK(fd.train.X.col(j).mean() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fd.trainval.X.col(j).mean() == doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK(fd.validation.X.col(0).mean() != doctest::Approx(0.0).epsilon(1e-9));
}
