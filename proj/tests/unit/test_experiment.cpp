#include "secret/experiment.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace secret;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.folds = 3;
  cfg.bo_iterations = 3;
  cfg.seed = 5;
  cfg.forest_space = HyperparameterSpace().add_integer("n_trees", 1, 8);
  cfg.perceptron_space = HyperparameterSpace().add_integer("hidden_units", 1, 4);
  cfg.settings.perceptron.max_epochs = 40;
  cfg.approaches.semantic_only = true;
  return cfg;
}

ExperimentConfig three_class_config() {
  auto cfg = small_config();
  cfg.label_vectors = secret::testing::three_class_vectors();
  return cfg;
}

ExperimentConfig separable_config() {
  auto cfg = small_config();
  cfg.label_vectors = {{"left", {0.0, 1.0}}, {"right", {3.0, -1.0}}};
  return cfg;
}

bool a_names_unique(const FoldReport& f) {
  std::set<std::string> names;
  for (const auto& a : f.approaches) names.insert(a.name);
  return names.size() == f.approaches.size();
}

RawTable three_class() { return secret::testing::three_class_table({.per_class = 24, .seed = 2}); }

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("secret_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_table(const RawTable& t, const fs::path& path) {
  std::ofstream out(path);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace

TEST_CASE("separable data: every approach is perfect on every fold") {
  const auto cfg = separable_config();
  const auto report = run_experiment(cfg, make_inputs(cfg, secret::testing::separable_table(30, 1)));
  REQUIRE(report.folds.size() == 3);
  for (const auto& f : report.folds) {
    CHECK(f.approaches.size() >= 4);
    for (const auto& a : f.approaches) {
      CAPTURE(a.name);
      CHECK(a.accuracy == 1.0);
      CHECK(a.macro_f1 == 1.0);
    }
  }
}

TEST_CASE("reports on overlapping data") {
  const auto cfg = three_class_config();
  const auto inputs = make_inputs(cfg, three_class());
  const auto report = run_experiment(cfg, inputs);
  REQUIRE(report.folds.size() == 3);

  SUBCASE("every approach used the fold's split") {
    for (const auto& f : report.folds) {
      for (const auto& a : f.approaches) CHECK(a.split_hash == f.split_hash);
      CHECK(a_names_unique(f));
    }
  }
  SUBCASE("metrics are in range and summarized") {
    for (const auto& f : report.folds) {
      CHECK(f.test_labels.size() == f.n_test);
      for (const auto& a : f.approaches) {
        CHECK(a.accuracy >= 0.0);
        CHECK(a.accuracy <= 1.0);
        CHECK(a.macro_f1 >= 0.0);
        CHECK(a.macro_f1 <= 1.0);
        CHECK(a.predictions.size() == f.n_test);
      }
      CHECK(f.tuning.count("feature") == 1);
      CHECK(f.tuning.at("feature").history.size() == 3);
      CHECK(f.depth_traditional.has_value());
      CHECK(f.depth_secret.has_value());
    }
    for (const char* name : {"secret", "feature_only", "semantic_only", "ensemble"}) {
      const auto* s = report.find_summary(name);
      REQUIRE(s != nullptr);
      CHECK(s->n_folds == 3);
    }
    CHECK(report.depth.has_value());
    CHECK(report.depth->n_folds == 3);
  }
  SUBCASE("JSON round trip") {
    const auto j = report_to_json(report);
    CHECK(report_to_json(report_from_json(j)) == j);
    CHECK(report_to_json(report_from_json(nlohmann::json::parse(j.dump()))) == j);
  }
  SUBCASE("CSV has one row per fold and approach") {
    const auto csv = format_report(report, ReportFormat::csv);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "fold,approach,algorithm,accuracy,macro_f1,split_hash");
    std::size_t rows = 0, expected = 0;
    while (std::getline(in, line)) rows += !line.empty();
    for (const auto& f : report.folds) expected += f.approaches.size();
    CHECK(rows == expected);
    CHECK(rows == 3 * report.folds.front().approaches.size());
  }
  SUBCASE("emit and reload") {
    const auto dir = scratch_dir("emit");
    emit_report(report, dir / "r.json", ReportFormat::json);
    std::ifstream in(dir / "r.json");
    CHECK(report_to_json(report_from_json(nlohmann::json::parse(in))) == report_to_json(report));
    CHECK_THROWS_AS(emit_report(report, dir / "missing" / "r.json", ReportFormat::json), Error);
  }
  SUBCASE("same seed, same bytes; more jobs, same folds") {
    const auto again = run_experiment(cfg, inputs);
    CHECK(format_report(again, ReportFormat::json) == format_report(report, ReportFormat::json));
    auto parallel = cfg;
    parallel.jobs = 3;
    const auto p = run_experiment(parallel, inputs);
    CHECK(report_to_json(p)["folds"] == report_to_json(report)["folds"]);
  }
}

TEST_CASE("uniform semantic confidences reproduce the feature-only predictions") {
  auto cfg = three_class_config();
  cfg.uniform_semantic = true;
  cfg.approaches.ensemble = false;
  cfg.approaches.semantic_only = false;
  const auto report = run_experiment(cfg, make_inputs(cfg, three_class()));
  for (const auto& f : report.folds) {
    const auto find = [&](const std::string& n) {
      return std::find_if(f.approaches.begin(), f.approaches.end(), [&](const ApproachReport& a) { return a.name == n; });
    };
    REQUIRE(find("secret") != f.approaches.end());
    REQUIRE(find("feature_only") != f.approaches.end());
    CHECK(find("secret")->predictions == find("feature_only")->predictions);
  }
}

TEST_CASE("automatic regressor choice reports the selection") {
  auto cfg = three_class_config();
  cfg.ss_candidates = {Algorithm::forest, Algorithm::perceptron};
  cfg.approaches.ensemble = false;
  cfg.approaches.semantic_only = false;
  const auto report = run_experiment(cfg, make_inputs(cfg, three_class()));
  for (const auto& f : report.folds) {
    REQUIRE(f.selection.has_value());
    CHECK(f.selection->candidates.size() == 2);
    CHECK(f.tuning.count("semantic:forest") == 1);
    CHECK(f.tuning.count("semantic:perceptron") == 1);
    const auto n_secret = std::count_if(f.approaches.begin(), f.approaches.end(), [](const ApproachReport& a) {
      return a.name.rfind("secret", 0) == 0;
    });
    CHECK(n_secret == (f.selection->inconclusive ? static_cast<long>(f.selection->tied.size()) : 1));
  }
}

TEST_CASE("fold failures name the fold and stage") {
  auto cfg = three_class_config();
  cfg.forest_space = HyperparameterSpace().add_integer("hidden_units", 1, 3);
  try {
    run_experiment(cfg, make_inputs(cfg, three_class()));
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("fold 0") != std::string::npos);
    CHECK(what.find("tuning") != std::string::npos);
  }
}

TEST_CASE("configuration parsing") {
  const auto base = nlohmann::json::parse(R"({
    "dataset": {"path": "d.csv", "columns": ["numeric", {"name": "colour", "kind": "categorical"}, "label"]},
    "label_vectors": {"a": [0, 1], "b": [1, 0]},
    "folds": 4, "seed": 11, "ss_algo": "auto", "bo_iterations": 7,
    "spaces": {"forest": {"n_trees": [2, 9]}, "perceptron": {"hidden_units": {"kind": "integer", "lower": 1, "upper": 5}}},
    "approaches": {"semantic_only": true},
    "forest": {"threads": 2}, "perceptron": {"max_epochs": 10}, "debug": {"uniform_semantic": true}
  })");
  const auto cfg = config_from_json(base, "/data");
  CHECK(cfg.dataset.path == fs::path("/data/d.csv"));
  CHECK(cfg.dataset.columns.size() == 3);
  CHECK(cfg.dataset.names[1] == "colour");
  CHECK(cfg.folds == 4);
  CHECK(cfg.seed == 11);
  CHECK(cfg.ss_candidates.size() == 2);
  CHECK(cfg.bo_iterations == 7);
  CHECK(cfg.forest_space.dims().front().lower == 2.0);
  CHECK(cfg.perceptron_space.dims().front().upper == 5.0);
  CHECK(cfg.approaches.semantic_only);
  CHECK(cfg.settings.forest.n_threads == 2);
  CHECK(cfg.settings.perceptron.max_epochs == 10);
  CHECK(cfg.uniform_semantic);
  CHECK(cfg.epsilon == kEpsilonDecide);

  SUBCASE("resolved config round-trips") {
    const auto j = config_to_json(cfg);
    CHECK(config_to_json(config_from_json(j)) == j);
  }
  SUBCASE("errors") {
    auto bad = [&](const char* patch) {
      auto j = base;
      j.merge_patch(nlohmann::json::parse(patch));
      try {
        config_from_json(j);
      } catch (const Error& e) {
        return e.code() == ErrorCode::config;
      }
      return false;
    };
    CHECK(bad(R"({"unknown_key": 1})"));
    CHECK(bad(R"({"folds": 1})"));
    CHECK(bad(R"({"validation_fraction": 1.5})"));
    CHECK(bad(R"({"bo_iterations": 0})"));
    CHECK(bad(R"({"epsilon": 0})"));
    CHECK(bad(R"({"fs_algo": "svm"})"));
    CHECK(bad(R"({"label_vectors": null})"));
    CHECK(bad(R"({"spaces": {"forest": {"n_trees": [9, 2]}}})"));
    CHECK(bad(R"({"approaches": {"everything": true}})"));
    CHECK(bad(R"({"folds": "ten"})"));
  }
  SUBCASE("files") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
    const auto dir = scratch_dir("cfg");
    std::ofstream(dir / "broken.json") << "{ \"folds\": ";
    try {
      load_config(dir / "broken.json");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
    }
    std::ofstream(dir / "commented.json") << "// comment\n" << base.dump();
    CHECK(load_config(dir / "commented.json").dataset.path == dir / "d.csv");
  }
}

TEST_CASE("report formats") {
  CHECK(parse_report_format("json") == ReportFormat::json);
  CHECK(parse_report_format("CSV") == ReportFormat::csv);
  try {
    parse_report_format("xml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_format);
  }
}

TEST_CASE("validation and label distances from files") {
  const auto dir = scratch_dir("validate");
  write_table(three_class(), dir / "data.csv");
  auto j = nlohmann::json::parse(R"({
    "dataset": {"path": "data.csv", "columns": ["numeric", "numeric", "numeric", "numeric", "label"]},
    "label_vectors": {"alpha": [6, 3, 0], "beta": [0, 0, 0], "gamma": [0.5, 0, 0]},
    "folds": 3
  })");
  std::ofstream(dir / "exp.json") << j.dump();
  const auto cfg = load_config(dir / "exp.json");
  const auto summary = validate_config(cfg);
  CHECK(summary.n_rows == 72);
  CHECK(summary.class_counts == std::vector<std::size_t>{24, 24, 24});
  CHECK(summary.vector_dim == 3);

  const auto d = label_distances(cfg);
  CHECK(d.distances(1, 2) == doctest::Approx(0.5));
  CHECK(d.distances(0, 1) == doctest::Approx(std::sqrt(45.0)));
  CHECK(d.distances(0, 0) == 0.0);
  CHECK(format_distances(d, ReportFormat::csv).find("beta") != std::string::npos);

  auto infeasible = cfg;
  infeasible.folds = 30;
  CHECK_THROWS_AS(validate_config(infeasible), Error);

  auto uncovered = cfg;
  uncovered.label_vectors.erase("gamma");
  try {
    validate_config(uncovered);
    FAIL("expected a vocabulary error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::vocabulary);
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }
}
