#include "secret/tuning.hpp"

#include "secret/fusion.hpp"
#include "secret/metrics.hpp"

#include <cmath>
#include <sstream>

namespace secret {
namespace {

double pick(TuningMetric metric, const Scores& s) {
  return metric == TuningMetric::accuracy ? s.accuracy : s.macro_f1;
}

// Runs BO and keeps the per-candidate metrics alongside the objective.
template <typename Evaluate>
TuningOutcome run_tuning(const HyperparameterSpace& space, const TuningSetup& setup,
                         std::string_view stage, Evaluate evaluate) {
  std::vector<TuningRecord> records;
  const Objective objective = [&](const HyperparameterPoint& point) {
    TuningRecord record;
    try {
      record = evaluate(point);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(stage) + " at " + describe(point) + ": " + e.what());
    }
    record.point = point;
    records.push_back(record);
    return record.objective;
  };
  const auto result =
      bayesian_optimize(objective, space, setup.budget, mix_seed(setup.seed, "bo"), setup.bo);
  TuningOutcome out;
  out.best_point = result.best_point;
  out.best_objective = result.best_objective;
  out.history = std::move(records);
  return out;
}

}  // namespace

TuningMetric parse_tuning_metric(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "accuracy") return TuningMetric::accuracy;
  if (lower == "macro_f1" || lower == "f1") return TuningMetric::macro_f1;
  fail(ErrorCode::config, "unknown tuning metric '" + std::string(name) + "'");
}

std::string_view to_string(TuningMetric metric) {
  return metric == TuningMetric::accuracy ? "accuracy" : "macro_f1";
}

std::uint64_t feature_model_seed(std::uint64_t seed) { return mix_seed(seed, "feature-model"); }
std::uint64_t semantic_model_seed(std::uint64_t seed) { return mix_seed(seed, "semantic-model"); }
std::uint64_t ensemble_model_seed(std::uint64_t seed) { return mix_seed(seed, "ensemble-model"); }

std::string describe(const HyperparameterPoint& point) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [name, value] : point) {
    if (!first) os << ", ";
    first = false;
    os << name << '=' << value;
  }
  os << '}';
  return os.str();
}

TuningOutcome tune_feature_hyperparameters(const Dataset& train, const Dataset& validation,
                                           Algorithm algo, const HyperparameterSpace& space,
                                           const TuningSetup& setup) {
  return run_tuning(space, setup, "feature-space tuning", [&](const HyperparameterPoint& point) {
    const auto model = train_classifier(algo, train, point, setup.settings, feature_model_seed(setup.seed));
    const auto s = score(validation.y, model.predict(validation.X), validation.n_classes());
    TuningRecord r;
    r.accuracy = s.accuracy;
    r.macro_f1 = s.macro_f1;
    r.objective = pick(setup.metric, s);
    return r;
  });
}

TuningOutcome tune_semantic_hyperparameters(const Dataset& train, const Dataset& validation,
                                            Algorithm fs_algo, const HyperparameterPoint& fs_hyp,
                                            Algorithm ss_algo, const HyperparameterSpace& ss_space,
                                            const LabelVectorSet& vectors, const TuningSetup& setup) {
  // The classifier is deterministic given its seed, so one fit serves every candidate.
  const auto classifier =
      train_classifier(fs_algo, train, fs_hyp, setup.settings, feature_model_seed(setup.seed));
  const auto fs_conf = classifier.confidence(validation.X);
  return run_tuning(ss_space, setup, "semantic-space tuning", [&](const HyperparameterPoint& point) {
    const auto regressor =
        train_regressor(ss_algo, train, vectors, point, setup.settings, semantic_model_seed(setup.seed));
    const auto ss_conf = semantic_confidence(regressor.predict(validation.X), vectors, kEpsilonTune);
    const auto predictions = fuse_and_decide_lenient(fs_conf, ss_conf);
    const auto s = score(validation.y, predictions, validation.n_classes());
    TuningRecord r;
    r.accuracy = s.accuracy;
    r.macro_f1 = s.macro_f1;
    r.objective = pick(setup.metric, s);
    for (bool d : ss_conf.diverged) r.diverged += d;
    return r;
  });
}

TuningOutcome tune_semantic_only(const Dataset& train, const Dataset& validation, Algorithm algo,
                                 const HyperparameterSpace& space, const LabelVectorSet& vectors,
                                 const TuningSetup& setup) {
  return run_tuning(space, setup, "semantic-only tuning", [&](const HyperparameterPoint& point) {
    const auto regressor =
        train_regressor(algo, train, vectors, point, setup.settings, semantic_model_seed(setup.seed));
    const auto s = score(validation.y, nearest_labels(regressor.predict(validation.X), vectors),
                         validation.n_classes());
    TuningRecord r;
    r.accuracy = s.accuracy;
    r.macro_f1 = s.macro_f1;
    r.objective = pick(setup.metric, s);
    return r;
  });
}

TuningOutcome tune_ensemble_member(const Dataset& train, const Dataset& validation,
                                   Algorithm first_algo, const HyperparameterPoint& first_hyp,
                                   Algorithm second_algo, const HyperparameterSpace& second_space,
                                   const TuningSetup& setup) {
  const auto first =
      train_classifier(first_algo, train, first_hyp, setup.settings, feature_model_seed(setup.seed));
  const auto first_conf = first.confidence(validation.X);
  return run_tuning(second_space, setup, "ensemble tuning", [&](const HyperparameterPoint& point) {
    const auto second =
        train_classifier(second_algo, train, point, setup.settings, ensemble_model_seed(setup.seed));
    const auto predictions = fuse_and_decide(first_conf, second.confidence(validation.X));
    const auto s = score(validation.y, predictions, validation.n_classes());
    TuningRecord r;
    r.accuracy = s.accuracy;
    r.macro_f1 = s.macro_f1;
    r.objective = pick(setup.metric, s);
    return r;
  });
}

}  // namespace secret
