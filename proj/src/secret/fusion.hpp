#pragma once

#include "secret/confidence.hpp"
#include "secret/embeddings.hpp"
#include "secret/metrics.hpp"
#include "secret/models.hpp"
#include "secret/tuning.hpp"

#include <optional>
#include <string>
#include <vector>

namespace secret {

/// Additive shift used for test-time decisions.
inline constexpr double kEpsilonDecide = 1e-200;
/// Tuning computes confidences without shift so exact hits diverge.
inline constexpr double kEpsilonTune = 0.0;

/// SSConf(j, k) = (1 / (d2(j,k) + eps)) / sum_m (1 / (d2(j,m) + eps)), where d2
/// is the squared distance from output row j to label vector k. With eps = 0 a
/// row that hits a label vector exactly is flagged diverged. Warns when eps is
/// not below the smallest positive gap between distances of a row.
ConfidenceMatrix semantic_confidence(const Matrix& outputs, const LabelVectorSet& vectors,
                                     double epsilon, std::vector<std::string>* warnings = nullptr);

/// Same formula on precomputed squared distances.
ConfidenceMatrix confidence_from_distances(const Matrix& squared_distances, double epsilon);

ConfidenceMatrix uniform_confidence(Eigen::Index rows, int n_classes);

/// Row-wise average of the two matrices.
Matrix fuse(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss);

/// argmax of the average, ties toward the lowest class id. Throws on diverged rows.
std::vector<int> fuse_and_decide(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss);

/// As fuse_and_decide, but diverged rows yield kNoLabel.
std::vector<int> fuse_and_decide_lenient(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss);

struct SecretConfig {
  Algorithm fs_algo = Algorithm::forest;
  Algorithm ss_algo = Algorithm::forest;
  double epsilon_decide = kEpsilonDecide;
  ModelSettings settings;
  std::uint64_t seed = 0;
  /// Replace the semantic confidences by 1/C (debugging the fusion).
  bool uniform_semantic = false;
};

struct ApproachResult {
  std::vector<int> predictions;
  Scores scores;
  std::optional<Classifier> classifier;
  std::optional<Regressor> regressor;
  /// Second member of the ensemble baseline.
  std::optional<Classifier> partner;
  std::vector<std::string> warnings;
};

/// Train on train+validation with the tuned hyperparameters, then fuse on test.
ApproachResult run_secret(const Dataset& trainval, const Dataset& test, const HyperparameterPoint& fs_hyp,
                          const HyperparameterPoint& ss_hyp, const LabelVectorSet& vectors,
                          const SecretConfig& cfg);

/// The feature-space classifier alone. Shares its seed with run_secret.
ApproachResult run_feature_only(const Dataset& trainval, const Dataset& test, Algorithm algo,
                                const HyperparameterPoint& hyp, const ModelSettings& settings,
                                std::uint64_t seed);

/// The semantic regressor alone; each instance takes the nearest label vector.
ApproachResult run_semantic_only(const Dataset& trainval, const Dataset& test, Algorithm algo,
                                 const HyperparameterPoint& hyp, const LabelVectorSet& vectors,
                                 const ModelSettings& settings, std::uint64_t seed);

struct EnsembleConfig {
  Algorithm first_algo = Algorithm::forest;
  HyperparameterPoint first_hyp;
  Algorithm second_algo = Algorithm::forest;
  HyperparameterSpace second_space;
  TuningSetup tuning;
};

struct EnsembleOutcome {
  ApproachResult result;
  TuningOutcome tuning;
};

/// Two feature-space classifiers fused like SECRET; the second is tuned by the
/// same loop against fused validation accuracy.
EnsembleOutcome run_ensemble_baseline(const Dataset& train, const Dataset& validation,
                                      const Dataset& trainval, const Dataset& test,
                                      const EnsembleConfig& cfg);

struct CandidateScore {
  std::string name;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct RegressorSelection {
  /// Index of the leading candidate.
  std::size_t chosen = 0;
  bool inconclusive = false;
  /// Candidates the leader could not be separated from (leader included).
  std::vector<std::size_t> tied;
};

/// A candidate beats another when its accuracy is more than one point higher,
/// or the accuracies are within a point and its F1 is more than one point
/// higher. When the leader beats nobody outright the selection is inconclusive.
RegressorSelection select_regressor(const std::vector<CandidateScore>& candidates);

}  // namespace secret
