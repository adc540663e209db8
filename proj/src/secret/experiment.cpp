#include "secret/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace secret {

using nlohmann::json;

namespace {

// Object view that remembers which keys were read so leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::config, where_ + ": expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::config, where_ + ": unknown key '" + key + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const auto* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        fail(ErrorCode::config, where_ + "." + key + ": " + e.what());
      }
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

HyperparameterSpace space_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::config, where + ": expected an object of ranges");
  HyperparameterSpace space;
  try {
    for (const auto& [name, range] : j.items()) {
      json lower, upper;
      std::string kind;
      if (range.is_array() && range.size() == 2) {
        lower = range[0];
        upper = range[1];
        kind = lower.is_number_integer() && upper.is_number_integer() ? "integer" : "real";
      } else if (range.is_object()) {
        Reader r(range, where + "." + name);
        r.read("kind", kind);
        if (const auto* v = r.find("lower")) lower = *v;
        if (const auto* v = r.find("upper")) upper = *v;
      }
      if (!lower.is_number() || !upper.is_number()) {
        fail(ErrorCode::config, where + "." + name + ": expected [lower, upper] or {kind, lower, upper}");
      }
      if (kind == "integer") {
        space.add_integer(name, std::lround(lower.get<double>()), std::lround(upper.get<double>()));
      } else if (kind == "real") {
        space.add_real(name, lower.get<double>(), upper.get<double>());
      } else {
        fail(ErrorCode::config, where + "." + name + ": kind must be integer or real");
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    fail(ErrorCode::config, where + ": " + e.what());
  }
  return space;
}

json space_to_json(const HyperparameterSpace& space) {
  json j = json::object();
  for (const auto& d : space.dims()) {
    j[d.name] = {{"kind", d.kind == ParameterKind::integer ? "integer" : "real"},
                 {"lower", d.lower},
                 {"upper", d.upper}};
  }
  return j;
}

void check_space(const HyperparameterSpace& space, Algorithm algo) {
  const auto name = std::string(tuned_parameter(algo));
  if (space.size() != 1 || space.dims().front().name != name ||
      space.dims().front().kind != ParameterKind::integer) {
    fail(ErrorCode::config, "spaces." + std::string(to_string(algo)) + " must hold the single integer range '" +
                                name + "'");
  }
  if (space.dims().front().lower < 1) {
    fail(ErrorCode::config, "spaces." + std::string(to_string(algo)) + "." + name + " must start at 1 or above");
  }
}

json tuning_to_json(const TuningOutcome& t) {
  json history = json::array();
  for (const auto& r : t.history) {
    history.push_back({{"point", r.point},
                       {"objective", r.objective},
                       {"accuracy", r.accuracy},
                       {"macro_f1", r.macro_f1},
                       {"diverged", r.diverged}});
  }
  return {{"best_point", t.best_point}, {"best_objective", t.best_objective}, {"history", history}};
}

TuningOutcome tuning_from_json(const json& j) {
  TuningOutcome t;
  t.best_point = j.at("best_point").get<HyperparameterPoint>();
  t.best_objective = j.at("best_objective").get<double>();
  for (const auto& h : j.at("history")) {
    TuningRecord r;
    r.point = h.at("point").get<HyperparameterPoint>();
    r.objective = h.at("objective").get<double>();
    r.accuracy = h.at("accuracy").get<double>();
    r.macro_f1 = h.at("macro_f1").get<double>();
    r.diverged = h.at("diverged").get<int>();
    t.history.push_back(std::move(r));
  }
  return t;
}

json depth_to_json(const DepthReport& d) {
  json per_class = json::array();
  for (std::size_t k = 0; k < d.per_class_avg_depth.size(); ++k) {
    per_class.push_back(d.present[k] ? json(d.per_class_avg_depth[k]) : json(nullptr));
  }
  return {{"fold", d.fold},
          {"n_trees", d.n_trees},
          {"per_class_avg_depth", per_class},
          {"overall_variance", d.overall_variance},
          {"warnings", d.warnings}};
}

DepthReport depth_from_json(const json& j) {
  DepthReport d;
  d.fold = j.at("fold").get<int>();
  d.n_trees = j.at("n_trees").get<int>();
  for (const auto& v : j.at("per_class_avg_depth")) {
    d.present.push_back(!v.is_null());
    d.per_class_avg_depth.push_back(v.is_null() ? 0.0 : v.get<double>());
  }
  d.overall_variance = j.at("overall_variance").get<double>();
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
  return d;
}

json comparison_to_json(const DepthComparison& c) {
  return {{"n_folds", c.n_folds},
          {"traditional_mean_variance", c.traditional_mean_variance},
          {"secret_mean_variance", c.secret_mean_variance},
          {"traditional_pooled_variance", c.traditional_pooled_variance},
          {"secret_pooled_variance", c.secret_pooled_variance},
          {"secret_larger", c.secret_larger},
          {"traditional_larger", c.traditional_larger},
          {"equal", c.equal}};
}

DepthComparison comparison_from_json(const json& j) {
  DepthComparison c;
  c.n_folds = j.at("n_folds").get<int>();
  c.traditional_mean_variance = j.at("traditional_mean_variance").get<double>();
  c.secret_mean_variance = j.at("secret_mean_variance").get<double>();
  c.traditional_pooled_variance = j.at("traditional_pooled_variance").get<double>();
  c.secret_pooled_variance = j.at("secret_pooled_variance").get<double>();
  c.secret_larger = j.at("secret_larger").get<int>();
  c.traditional_larger = j.at("traditional_larger").get<int>();
  c.equal = j.at("equal").get<int>();
  return c;
}

json fold_to_json(const FoldReport& f) {
  json approaches = json::array();
  for (const auto& a : f.approaches) {
    approaches.push_back({{"name", a.name},
                          {"algorithm", a.algorithm},
                          {"accuracy", a.accuracy},
                          {"macro_f1", a.macro_f1},
                          {"split_hash", a.split_hash},
                          {"predictions", a.predictions}});
  }
  json tuning = json::object();
  for (const auto& [name, t] : f.tuning) tuning[name] = tuning_to_json(t);
  json j = {{"fold", f.fold},
            {"seed", f.seed},
            {"split_hash", f.split_hash},
            {"n_train", f.n_train},
            {"n_validation", f.n_validation},
            {"n_test", f.n_test},
            {"test_labels", f.test_labels},
            {"fs_hyperparameters", f.fs_hyperparameters},
            {"ss_hyperparameters", f.ss_hyperparameters},
            {"tuning", tuning},
            {"approaches", approaches},
            {"warnings", f.warnings}};
  if (f.selection) {
    json candidates = json::array();
    for (const auto& c : f.selection->candidates) {
      candidates.push_back({{"name", c.name}, {"accuracy", c.accuracy}, {"macro_f1", c.macro_f1}});
    }
    j["selection"] = {{"candidates", candidates},
                      {"chosen", f.selection->chosen},
                      {"inconclusive", f.selection->inconclusive},
                      {"tied", f.selection->tied}};
  } else {
    j["selection"] = nullptr;
  }
  j["depth_traditional"] = f.depth_traditional ? depth_to_json(*f.depth_traditional) : json(nullptr);
  j["depth_secret"] = f.depth_secret ? depth_to_json(*f.depth_secret) : json(nullptr);
  return j;
}

FoldReport fold_from_json(const json& j) {
  FoldReport f;
  f.fold = j.at("fold").get<int>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.split_hash = j.at("split_hash").get<std::uint64_t>();
  f.n_train = j.at("n_train").get<std::size_t>();
  f.n_validation = j.at("n_validation").get<std::size_t>();
  f.n_test = j.at("n_test").get<std::size_t>();
  f.test_labels = j.at("test_labels").get<std::vector<int>>();
  f.fs_hyperparameters = j.at("fs_hyperparameters").get<HyperparameterPoint>();
  f.ss_hyperparameters = j.at("ss_hyperparameters").get<std::map<std::string, HyperparameterPoint>>();
  for (const auto& [name, t] : j.at("tuning").items()) f.tuning[name] = tuning_from_json(t);
  for (const auto& a : j.at("approaches")) {
    f.approaches.push_back({a.at("name").get<std::string>(), a.at("algorithm").get<std::string>(),
                            a.at("accuracy").get<double>(), a.at("macro_f1").get<double>(),
                            a.at("split_hash").get<std::uint64_t>(), a.at("predictions").get<std::vector<int>>()});
  }
  f.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (const auto& s = j.at("selection"); !s.is_null()) {
    SelectionReport sel;
    for (const auto& c : s.at("candidates")) {
      sel.candidates.push_back({c.at("name").get<std::string>(), c.at("accuracy").get<double>(),
                                c.at("macro_f1").get<double>()});
    }
    sel.chosen = s.at("chosen").get<std::string>();
    sel.inconclusive = s.at("inconclusive").get<bool>();
    sel.tied = s.at("tied").get<std::vector<std::string>>();
    f.selection = std::move(sel);
  }
  if (const auto& d = j.at("depth_traditional"); !d.is_null()) f.depth_traditional = depth_from_json(d);
  if (const auto& d = j.at("depth_secret"); !d.is_null()) f.depth_secret = depth_from_json(d);
  return f;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Rethrows with the fold and pipeline stage in front of the message.
template <typename F>
auto stage(int fold, std::string_view name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "fold " + std::to_string(fold) + ", " + std::string(name) + ": " + e.what());
  }
}

CandidateScore best_candidate(std::string name, const TuningOutcome& t) {
  CandidateScore c{std::move(name), 0.0, 0.0};
  for (const auto& r : t.history) {
    if (r.point == t.best_point) {
      c.accuracy = r.accuracy;
      c.macro_f1 = r.macro_f1;
      break;
    }
  }
  return c;
}

ApproachReport approach_report(std::string name, std::string algorithm, const ApproachResult& r,
                               std::uint64_t split_hash) {
  return {std::move(name), std::move(algorithm), r.scores.accuracy, r.scores.macro_f1, split_hash, r.predictions};
}

FoldReport run_fold(const ExperimentConfig& cfg, const ExperimentInputs& in, const Fold& fold, int index) {
  FoldReport report;
  report.fold = index;
  report.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
  const auto seed = report.seed;

  const auto data = stage(index, "preprocessing", [&] {
    return prepare_fold(in.table, in.labels, fold, cfg.validation_fraction, mix_seed(seed, "validation"),
                        PreprocessOptions{cfg.dataset.standardize}, &report.warnings);
  });
  report.split_hash = hash_indices(data.test_rows);
  report.n_train = data.train_rows.size();
  report.n_validation = data.validation_rows.size();
  report.n_test = data.test_rows.size();
  report.test_labels = data.test.y;

  TuningSetup setup;
  setup.budget = cfg.bo_iterations;
  setup.seed = seed;
  setup.metric = cfg.tuning_metric;
  setup.settings = cfg.settings;

  const bool need_fs = cfg.approaches.secret || cfg.approaches.feature_only || cfg.approaches.ensemble;
  if (need_fs) {
    auto t = stage(index, "feature-space tuning", [&] {
      return tune_feature_hyperparameters(data.train, data.validation, cfg.fs_algo, cfg.space(cfg.fs_algo), setup);
    });
    report.fs_hyperparameters = t.best_point;
    report.tuning["feature"] = std::move(t);
  }

  std::optional<ApproachResult> secret_main;
  if (cfg.approaches.secret) {
    std::vector<CandidateScore> candidates;
    for (const auto algo : cfg.ss_candidates) {
      const auto name = std::string(to_string(algo));
      auto t = stage(index, "semantic-space tuning (" + name + ")", [&] {
        return tune_semantic_hyperparameters(data.train, data.validation, cfg.fs_algo, report.fs_hyperparameters,
                                             algo, cfg.space(algo), *in.vectors, setup);
      });
      candidates.push_back(best_candidate(name, t));
      report.ss_hyperparameters[name] = t.best_point;
      report.tuning["semantic:" + name] = std::move(t);
    }
    const auto selection = select_regressor(candidates);
    if (candidates.size() > 1) {
      SelectionReport sel;
      sel.candidates = candidates;
      sel.chosen = candidates[selection.chosen].name;
      sel.inconclusive = selection.inconclusive;
      for (auto i : selection.tied) sel.tied.push_back(candidates[i].name);
      report.selection = std::move(sel);
    }
    // The leader is reported as "secret"; inconclusive runs also report the others it tied with.
    std::vector<std::size_t> order{selection.chosen};
    for (auto i : selection.tied) {
      if (i != selection.chosen) order.push_back(i);
    }
    for (const auto i : order) {
      const auto algo = cfg.ss_candidates[i];
      const auto name = std::string(to_string(algo));
      SecretConfig sc;
      sc.fs_algo = cfg.fs_algo;
      sc.ss_algo = algo;
      sc.epsilon_decide = cfg.epsilon;
      sc.settings = cfg.settings;
      sc.seed = seed;
      sc.uniform_semantic = cfg.uniform_semantic;
      auto r = stage(index, "SECRET (" + name + ")", [&] {
        return run_secret(data.trainval, data.test, report.fs_hyperparameters, report.ss_hyperparameters[name],
                          *in.vectors, sc);
      });
      for (auto& w : r.warnings) report.warnings.push_back("SECRET (" + name + "): " + w);
      const bool leader = i == selection.chosen;
      report.approaches.push_back(approach_report(leader ? "secret" : "secret:" + name,
                                                  std::string(to_string(cfg.fs_algo)) + "+" + name, r,
                                                  report.split_hash));
      if (leader) secret_main = std::move(r);
    }
  }

  std::optional<ApproachResult> feature_only;
  if (cfg.approaches.feature_only) {
    feature_only = stage(index, "feature-only", [&] {
      return run_feature_only(data.trainval, data.test, cfg.fs_algo, report.fs_hyperparameters, cfg.settings, seed);
    });
    report.approaches.push_back(
        approach_report("feature_only", std::string(to_string(cfg.fs_algo)), *feature_only, report.split_hash));
  }

  if (cfg.approaches.semantic_only) {
    const auto algo = cfg.ss_candidates.front();
    auto t = stage(index, "semantic-only tuning", [&] {
      return tune_semantic_only(data.train, data.validation, algo, cfg.space(algo), *in.vectors, setup);
    });
    const auto r = stage(index, "semantic-only", [&] {
      return run_semantic_only(data.trainval, data.test, algo, t.best_point, *in.vectors, cfg.settings, seed);
    });
    report.tuning["semantic_only"] = std::move(t);
    report.approaches.push_back(
        approach_report("semantic_only", std::string(to_string(algo)), r, report.split_hash));
  }

  if (cfg.approaches.ensemble) {
    EnsembleConfig ec;
    ec.first_algo = cfg.fs_algo;
    ec.first_hyp = report.fs_hyperparameters;
    ec.second_algo = cfg.ensemble_algo;
    ec.second_space = cfg.space(cfg.ensemble_algo);
    ec.tuning = setup;
    auto out = stage(index, "ensemble", [&] {
      return run_ensemble_baseline(data.train, data.validation, data.trainval, data.test, ec);
    });
    report.tuning["ensemble"] = std::move(out.tuning);
    report.approaches.push_back(approach_report(
        "ensemble", std::string(to_string(cfg.fs_algo)) + "+" + std::string(to_string(cfg.ensemble_algo)),
        out.result, report.split_hash));
  }

  // The feature-only classifier and SECRET's classifier share data, hyperparameters and seed.
  const Classifier* traditional = nullptr;
  if (feature_only && feature_only->classifier) traditional = &*feature_only->classifier;
  else if (secret_main && secret_main->classifier) traditional = &*secret_main->classifier;
  const int C = in.labels.n_classes();
  if (traditional && traditional->forest()) {
    report.depth_traditional = node_depth_stats(*traditional->forest(), C);
    report.depth_traditional->fold = index;
  }
  if (secret_main && secret_main->regressor && secret_main->regressor->forest()) {
    report.depth_secret = node_depth_stats(*secret_main->regressor->forest(), C, &*in.vectors);
    report.depth_secret->fold = index;
  }
  return report;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  Reader root(j, "config");

  if (const auto* ds = root.find("dataset")) {
    Reader r(*ds, "dataset");
    std::string path, delimiter = ",";
    r.read("path", path);
    if (path.empty()) fail(ErrorCode::config, "dataset.path is required");
    cfg.dataset.path = resolve(base_dir, path);
    r.read("has_header", cfg.dataset.has_header);
    r.read("delimiter", delimiter);
    if (delimiter.size() != 1) fail(ErrorCode::config, "dataset.delimiter must be a single character");
    cfg.dataset.delimiter = delimiter[0];
    r.read("standardize", cfg.dataset.standardize);
    const auto* cols = r.find("columns");
    if (!cols || !cols->is_array() || cols->empty()) fail(ErrorCode::config, "dataset.columns must be a non-empty list");
    for (const auto& c : *cols) {
      std::string kind, name;
      if (c.is_string()) {
        kind = c.get<std::string>();
      } else {
        Reader cr(c, "dataset.columns[]");
        cr.read("kind", kind);
        cr.read("name", name);
      }
      try {
        cfg.dataset.columns.push_back(parse_column_kind(kind));
      } catch (const Error& e) {
        fail(ErrorCode::config, std::string("dataset.columns: ") + e.what());
      }
      cfg.dataset.names.push_back(name.empty() ? "c" + std::to_string(cfg.dataset.names.size()) : name);
    }
  } else {
    fail(ErrorCode::config, "config.dataset is required");
  }

  root.read("labels", cfg.label_texts);
  std::string embeddings;
  root.read("embeddings", embeddings);
  cfg.embeddings = resolve(base_dir, embeddings);
  root.read("label_vectors", cfg.label_vectors);
  root.read("folds", cfg.folds);
  root.read("seed", cfg.seed);
  root.read("validation_fraction", cfg.validation_fraction);

  std::string fs = "forest", ss = "forest", ens;
  root.read("fs_algo", fs);
  root.read("ss_algo", ss);
  root.read("ensemble_algo", ens);
  cfg.fs_algo = parse_algorithm(fs);
  if (to_lower(ss) == "auto") {
    cfg.ss_candidates = {Algorithm::forest, Algorithm::perceptron};
  } else {
    cfg.ss_candidates = {parse_algorithm(ss)};
  }
  cfg.ensemble_algo = ens.empty() ? cfg.fs_algo : parse_algorithm(ens);

  if (const auto* spaces = root.find("spaces")) {
    Reader r(*spaces, "spaces");
    if (const auto* s = r.find("forest")) cfg.forest_space = space_from_json(*s, "spaces.forest");
    if (const auto* s = r.find("perceptron")) cfg.perceptron_space = space_from_json(*s, "spaces.perceptron");
  }
  check_space(cfg.forest_space, Algorithm::forest);
  check_space(cfg.perceptron_space, Algorithm::perceptron);

  root.read("bo_iterations", cfg.bo_iterations);
  std::string metric = "accuracy";
  root.read("tuning_metric", metric);
  cfg.tuning_metric = parse_tuning_metric(metric);
  root.read("epsilon", cfg.epsilon);

  if (const auto* a = root.find("approaches")) {
    Reader r(*a, "approaches");
    r.read("secret", cfg.approaches.secret);
    r.read("feature_only", cfg.approaches.feature_only);
    r.read("semantic_only", cfg.approaches.semantic_only);
    r.read("ensemble", cfg.approaches.ensemble);
  }
  if (const auto* f = root.find("forest")) {
    Reader r(*f, "forest");
    r.read("max_depth", cfg.settings.forest.max_depth);
    r.read("min_samples_split", cfg.settings.forest.min_samples_split);
    r.read("max_features", cfg.settings.forest.max_features);
    r.read("bootstrap", cfg.settings.forest.bootstrap);
    r.read("threads", cfg.settings.forest.n_threads);
  }
  if (const auto* p = root.find("perceptron")) {
    Reader r(*p, "perceptron");
    r.read("learning_rate", cfg.settings.perceptron.learning_rate);
    r.read("momentum", cfg.settings.perceptron.momentum);
    r.read("batch_size", cfg.settings.perceptron.batch_size);
    r.read("max_epochs", cfg.settings.perceptron.max_epochs);
    r.read("patience", cfg.settings.perceptron.patience);
    r.read("tolerance", cfg.settings.perceptron.tolerance);
  }
  if (const auto* d = root.find("debug")) {
    Reader r(*d, "debug");
    r.read("uniform_semantic", cfg.uniform_semantic);
  }
  root.read("jobs", cfg.jobs);

  if (cfg.folds < 2) fail(ErrorCode::config, "folds must be at least 2");
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    fail(ErrorCode::config, "validation_fraction must lie strictly between 0 and 1");
  }
  if (cfg.bo_iterations < 1) fail(ErrorCode::config, "bo_iterations must be at least 1");
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) fail(ErrorCode::config, "epsilon must be positive");
  if (cfg.jobs < 1) fail(ErrorCode::config, "jobs must be at least 1");
  if (cfg.needs_vectors() && cfg.embeddings.empty() && cfg.label_vectors.empty()) {
    fail(ErrorCode::config, "SECRET and semantic-only runs need embeddings or label_vectors");
  }
  const auto& mlp = cfg.settings.perceptron;
  if (!(mlp.learning_rate > 0.0) || mlp.batch_size < 1 || mlp.max_epochs < 1 || mlp.patience < 1) {
    fail(ErrorCode::config, "perceptron settings must be positive");
  }
  if (cfg.settings.forest.min_samples_split < 2 || cfg.settings.forest.max_depth < 0 ||
      cfg.settings.forest.max_features < 0 || cfg.settings.forest.n_threads < 1) {
    fail(ErrorCode::config, "forest settings out of range");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, "config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg) {
  json columns = json::array();
  for (std::size_t i = 0; i < cfg.dataset.columns.size(); ++i) {
    columns.push_back({{"name", cfg.dataset.names[i]}, {"kind", std::string(to_string(cfg.dataset.columns[i]))}});
  }
  std::string ss = cfg.ss_candidates.size() > 1 ? "auto" : std::string(to_string(cfg.ss_candidates.front()));
  const auto& f = cfg.settings.forest;
  const auto& p = cfg.settings.perceptron;
  return {
      {"dataset",
       {{"path", cfg.dataset.path.generic_string()},
        {"has_header", cfg.dataset.has_header},
        {"delimiter", std::string(1, cfg.dataset.delimiter)},
        {"standardize", cfg.dataset.standardize},
        {"columns", columns}}},
      {"labels", cfg.label_texts},
      {"embeddings", cfg.embeddings.empty() ? json(nullptr) : json(cfg.embeddings.generic_string())},
      {"label_vectors", cfg.label_vectors},
      {"folds", cfg.folds},
      {"seed", cfg.seed},
      {"validation_fraction", cfg.validation_fraction},
      {"fs_algo", std::string(to_string(cfg.fs_algo))},
      {"ss_algo", ss},
      {"ensemble_algo", std::string(to_string(cfg.ensemble_algo))},
      {"spaces", {{"forest", space_to_json(cfg.forest_space)}, {"perceptron", space_to_json(cfg.perceptron_space)}}},
      {"bo_iterations", cfg.bo_iterations},
      {"tuning_metric", std::string(to_string(cfg.tuning_metric))},
      {"epsilon", cfg.epsilon},
      {"approaches",
       {{"secret", cfg.approaches.secret},
        {"feature_only", cfg.approaches.feature_only},
        {"semantic_only", cfg.approaches.semantic_only},
        {"ensemble", cfg.approaches.ensemble}}},
      {"forest",
       {{"max_depth", f.max_depth},
        {"min_samples_split", f.min_samples_split},
        {"max_features", f.max_features},
        {"bootstrap", f.bootstrap},
        {"threads", f.n_threads}}},
      {"perceptron",
       {{"learning_rate", p.learning_rate},
        {"momentum", p.momentum},
        {"batch_size", p.batch_size},
        {"max_epochs", p.max_epochs},
        {"patience", p.patience},
        {"tolerance", p.tolerance}}},
      {"debug", {{"uniform_semantic", cfg.uniform_semantic}}},
      {"jobs", cfg.jobs},
  };
}

ExperimentInputs make_inputs(const ExperimentConfig& cfg, RawTable table, const EmbeddingTable* embeddings) {
  ExperimentInputs in;
  in.table = std::move(table);
  in.labels = LabelEncoding::from_table(in.table);
  for (const auto& raw : in.labels.labels()) {
    const auto it = cfg.label_texts.find(raw);
    in.label_texts.push_back(it == cfg.label_texts.end() ? raw : it->second);
  }
  for (const auto& [raw, text] : cfg.label_texts) {
    const auto& labels = in.labels.labels();
    if (!std::binary_search(labels.begin(), labels.end(), raw)) {
      in.warnings.push_back("label '" + raw + "' from the labels map does not occur in the data");
    }
  }
  if (!cfg.label_vectors.empty()) {
    LabelVectorSet vs;
    std::string missing;
    int dim = -1;
    for (const auto& text : in.label_texts) {
      const auto it = cfg.label_vectors.find(text);
      if (it == cfg.label_vectors.end()) {
        missing += (missing.empty() ? "" : ", ") + ("'" + text + "'");
        continue;
      }
      if (dim < 0) dim = static_cast<int>(it->second.size());
      if (static_cast<int>(it->second.size()) != dim || dim == 0) {
        fail(ErrorCode::config, "label_vectors: inconsistent dimension for '" + text + "'");
      }
    }
    if (!missing.empty()) fail(ErrorCode::vocabulary, "label_vectors lack " + missing);
    vs.V.resize(static_cast<Eigen::Index>(in.label_texts.size()), dim);
    for (std::size_t k = 0; k < in.label_texts.size(); ++k) {
      const auto& v = cfg.label_vectors.at(in.label_texts[k]);
      for (int d = 0; d < dim; ++d) vs.V(static_cast<Eigen::Index>(k), d) = v[static_cast<std::size_t>(d)];
      vs.class_labels.push_back(in.label_texts[k]);
    }
    vs.validate();
    in.vectors = std::move(vs);
  } else if (embeddings) {
    // Collect every uncovered label before failing.
    std::string missing;
    for (const auto& text : in.label_texts) {
      try {
        label_vector(text, *embeddings);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::vocabulary) throw;
        missing += (missing.empty() ? "" : "; ") + std::string(e.what());
      }
    }
    if (!missing.empty()) fail(ErrorCode::vocabulary, missing);
    in.vectors = make_label_vectors(in.label_texts, *embeddings);
  }
  return in;
}

ExperimentInputs load_inputs(const ExperimentConfig& cfg) {
  CsvOptions opts;
  opts.delimiter = cfg.dataset.delimiter;
  opts.has_header = cfg.dataset.has_header;
  auto table = load_csv(cfg.dataset.path, cfg.dataset.columns, opts);
  if (!cfg.dataset.has_header) table.column_names = cfg.dataset.names;
  std::vector<std::string> warnings;
  std::optional<EmbeddingTable> embeddings;
  if (cfg.label_vectors.empty() && !cfg.embeddings.empty()) embeddings = load_embeddings(cfg.embeddings, &warnings);
  auto in = make_inputs(cfg, std::move(table), embeddings ? &*embeddings : nullptr);
  in.warnings.insert(in.warnings.begin(), warnings.begin(), warnings.end());
  return in;
}

std::vector<ApproachSummary> summarize(const std::vector<FoldReport>& folds) {
  std::vector<std::string> names;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> values;
  for (const auto& f : folds) {
    for (const auto& a : f.approaches) {
      if (!values.count(a.name)) names.push_back(a.name);
      values[a.name].first.push_back(a.accuracy);
      values[a.name].second.push_back(a.macro_f1);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<ApproachSummary> out;
  for (const auto& name : names) {
    const auto& [acc, f1] = values[name];
    out.push_back({name, static_cast<int>(acc.size()), mean(acc), std::sqrt(sample_variance(acc)), mean(f1),
                   std::sqrt(sample_variance(f1))});
  }
  return out;
}

const ApproachSummary* ExperimentReport::find_summary(std::string_view name) const {
  for (const auto& s : summary) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& in) {
  if (cfg.needs_vectors() && !in.vectors) fail(ErrorCode::config, "SECRET and semantic-only runs need label vectors");
  if (in.vectors && in.vectors->n_classes() != in.labels.n_classes()) {
    fail(ErrorCode::invalid_argument, "label vector count differs from class count");
  }
  ExperimentReport report;
  report.config = config_to_json(cfg);
  report.class_labels = in.labels.labels();
  report.label_texts = in.label_texts;
  report.warnings = in.warnings;

  const auto y = in.labels.encode(in.table);
  const auto plan = stratified_kfold(y, in.labels.n_classes(), cfg.folds, mix_seed(cfg.seed, "split"));
  const int n = static_cast<int>(plan.folds.size());
  std::vector<std::optional<FoldReport>> results(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = run_fold(cfg, in, plan.folds[static_cast<std::size_t>(i)], i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int jobs = std::min(cfg.jobs, n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& r : results) report.folds.push_back(std::move(*r));
  for (const auto& f : report.folds) {
    for (const auto& w : f.warnings) report.warnings.push_back("fold " + std::to_string(f.fold) + ": " + w);
  }
  report.summary = summarize(report.folds);

  std::vector<DepthReport> traditional, secret;
  for (const auto& f : report.folds) {
    if (f.depth_traditional && f.depth_secret) {
      traditional.push_back(*f.depth_traditional);
      secret.push_back(*f.depth_secret);
    }
  }
  if (!traditional.empty()) report.depth = compare_depth_variance(traditional, secret);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_inputs(cfg)); }

json report_to_json(const ExperimentReport& report) {
  json folds = json::array();
  for (const auto& f : report.folds) folds.push_back(fold_to_json(f));
  json summary = json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"name", s.name},
                       {"n_folds", s.n_folds},
                       {"mean_accuracy", s.mean_accuracy},
                       {"std_accuracy", s.std_accuracy},
                       {"mean_macro_f1", s.mean_macro_f1},
                       {"std_macro_f1", s.std_macro_f1}});
  }
  return {{"version", report.version},
          {"config", report.config},
          {"class_labels", report.class_labels},
          {"label_texts", report.label_texts},
          {"folds", folds},
          {"summary", summary},
          {"depth", report.depth ? comparison_to_json(*report.depth) : json(nullptr)},
          {"warnings", report.warnings}};
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  try {
    r.version = j.at("version").get<std::string>();
    r.config = j.at("config");
    r.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    r.label_texts = j.at("label_texts").get<std::vector<std::string>>();
    for (const auto& f : j.at("folds")) r.folds.push_back(fold_from_json(f));
    for (const auto& s : j.at("summary")) {
      r.summary.push_back({s.at("name").get<std::string>(), s.at("n_folds").get<int>(),
                           s.at("mean_accuracy").get<double>(), s.at("std_accuracy").get<double>(),
                           s.at("mean_macro_f1").get<double>(), s.at("std_macro_f1").get<double>()});
    }
    if (const auto& d = j.at("depth"); !d.is_null()) r.depth = comparison_from_json(d);
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("report: ") + e.what());
  }
  return r;
}

ReportFormat parse_report_format(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "json") return ReportFormat::json;
  if (lower == "csv") return ReportFormat::csv;
  fail(ErrorCode::unsupported_format, "unsupported report format '" + std::string(name) + "'");
}

std::string format_report(const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return report_to_json(report).dump(2) + "\n";
  std::ostringstream os;
  os << "fold,approach,algorithm,accuracy,macro_f1,split_hash\n";
  for (const auto& f : report.folds) {
    for (const auto& a : f.approaches) {
      os << f.fold << ',' << csv_field(a.name) << ',' << csv_field(a.algorithm) << ',' << format_double(a.accuracy)
         << ',' << format_double(a.macro_f1) << ',' << a.split_hash << '\n';
    }
  }
  return os.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format) {
  const auto text = format_report(report, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::io, "write to '" + path.string() + "' failed");
}

DatasetSummary validate_config(const ExperimentConfig& cfg) {
  const auto in = load_inputs(cfg);
  DatasetSummary s;
  s.n_rows = in.table.size();
  s.class_labels = in.labels.labels();
  s.label_texts = in.label_texts;
  s.class_counts.assign(s.class_labels.size(), 0);
  for (int c : in.labels.encode(in.table)) ++s.class_counts[static_cast<std::size_t>(c)];
  for (std::size_t k = 0; k < s.class_counts.size(); ++k) {
    if (s.class_counts[k] < static_cast<std::size_t>(cfg.folds)) {
      fail(ErrorCode::config, "class '" + s.class_labels[k] + "' has " + std::to_string(s.class_counts[k]) +
                                  " rows, fewer than the " + std::to_string(cfg.folds) + " folds");
    }
  }
  s.warnings = in.warnings;
  const auto encoded = preprocess(in.table, PreprocessOptions{cfg.dataset.standardize}, &s.warnings);
  s.n_features = encoded.n_features();
  if (in.vectors) s.vector_dim = in.vectors->dim();
  if (cfg.needs_vectors() && !in.vectors) fail(ErrorCode::config, "no label vectors available");
  return s;
}

json summary_to_json(const DatasetSummary& s) {
  return {{"n_rows", s.n_rows},
          {"n_features", s.n_features},
          {"class_labels", s.class_labels},
          {"label_texts", s.label_texts},
          {"class_counts", s.class_counts},
          {"vector_dim", s.vector_dim},
          {"warnings", s.warnings}};
}

LabelDistances label_distances(const ExperimentConfig& cfg) {
  auto vcfg = cfg;
  vcfg.approaches.secret = true;
  const auto in = load_inputs(vcfg);
  if (!in.vectors) fail(ErrorCode::config, "no embeddings or label_vectors configured");
  LabelDistances d;
  d.class_labels = in.labels.labels();
  d.label_texts = in.label_texts;
  d.distances = pairwise_squared_distances(*in.vectors).array().sqrt().matrix();
  return d;
}

std::string format_distances(const LabelDistances& d, ReportFormat format) {
  const auto n = d.distances.rows();
  if (format == ReportFormat::json) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < n; ++k) row.push_back(d.distances(i, k));
      rows.push_back(row);
    }
    return json{{"class_labels", d.class_labels}, {"label_texts", d.label_texts}, {"distances", rows}}.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "label";
  for (const auto& t : d.label_texts) os << ',' << csv_field(t);
  os << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    os << csv_field(d.label_texts[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < n; ++k) os << ',' << format_double(d.distances(i, k));
    os << '\n';
  }
  return os.str();
}

}  // namespace secret
