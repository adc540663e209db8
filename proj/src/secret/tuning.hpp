#pragma once

#include "secret/bayes_opt.hpp"
#include "secret/models.hpp"

#include <string_view>
#include <vector>

namespace secret {

enum class TuningMetric { accuracy, macro_f1 };

TuningMetric parse_tuning_metric(std::string_view name);
std::string_view to_string(TuningMetric metric);

/// One evaluated candidate with both validation metrics.
struct TuningRecord {
  HyperparameterPoint point;
  double objective = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  /// Validation rows whose semantic output sat exactly on a label vector.
  int diverged = 0;
};

struct TuningOutcome {
  HyperparameterPoint best_point;
  double best_objective = 0.0;
  std::vector<TuningRecord> history;
};

struct TuningSetup {
  int budget = 30;
  std::uint64_t seed = 0;
  TuningMetric metric = TuningMetric::accuracy;
  ModelSettings settings;
  BayesOptOptions bo;
};

/// Objective = validation score of a single feature-space classifier.
TuningOutcome tune_feature_hyperparameters(const Dataset& train, const Dataset& validation,
                                           Algorithm algo, const HyperparameterSpace& space,
                                           const TuningSetup& setup);

/// SECRET joint tuning. The feature-space classifier is trained on `train`
/// with `fs_hyp`; each candidate regressor's confidences are computed without
/// additive shift, fused, and scored on `validation`. Diverged rows count as
/// misclassified.
TuningOutcome tune_semantic_hyperparameters(const Dataset& train, const Dataset& validation,
                                            Algorithm fs_algo, const HyperparameterPoint& fs_hyp,
                                            Algorithm ss_algo, const HyperparameterSpace& ss_space,
                                            const LabelVectorSet& vectors, const TuningSetup& setup);

/// Same loop with a second feature-space classifier in place of the regressor.
TuningOutcome tune_ensemble_member(const Dataset& train, const Dataset& validation,
                                   Algorithm first_algo, const HyperparameterPoint& first_hyp,
                                   Algorithm second_algo, const HyperparameterSpace& second_space,
                                   const TuningSetup& setup);

/// Regressor alone; each validation instance takes the nearest label vector.
TuningOutcome tune_semantic_only(const Dataset& train, const Dataset& validation, Algorithm algo,
                                 const HyperparameterSpace& space, const LabelVectorSet& vectors,
                                 const TuningSetup& setup);

/// Seeds for the models of one pipeline. Every approach trains its feature-space
/// classifier from the same seed so fused and single-space runs share it.
std::uint64_t feature_model_seed(std::uint64_t seed);
std::uint64_t semantic_model_seed(std::uint64_t seed);
std::uint64_t ensemble_model_seed(std::uint64_t seed);

std::string describe(const HyperparameterPoint& point);

}  // namespace secret
