#include "secret/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace secret {
namespace {

constexpr double kPoint = 0.01;
constexpr double kGapTolerance = 1e-12;

void check_shapes(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss) {
  if (fs.scores.rows() != ss.scores.rows() || fs.scores.cols() != ss.scores.cols()) {
    std::ostringstream os;
    os << "fusion: shape mismatch " << fs.scores.rows() << 'x' << fs.scores.cols() << " vs "
       << ss.scores.rows() << 'x' << ss.scores.cols();
    fail(ErrorCode::invalid_argument, os.str());
  }
}

// Smallest positive difference between two entries of the same row.
double min_positive_gap(const Matrix& d2) {
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> row(static_cast<std::size_t>(d2.cols()));
  for (Eigen::Index j = 0; j < d2.rows(); ++j) {
    for (Eigen::Index k = 0; k < d2.cols(); ++k) row[static_cast<std::size_t>(k)] = d2(j, k);
    std::sort(row.begin(), row.end());
    for (std::size_t k = 1; k < row.size(); ++k) {
      const double g = row[k] - row[k - 1];
      if (g > 0.0) gap = std::min(gap, g);
    }
  }
  return gap;
}

// Beats in the selection sense: decisive accuracy win, or F1 win within an accuracy tie.
bool beats(const CandidateScore& a, const CandidateScore& b) {
  const double dacc = a.accuracy - b.accuracy;
  if (std::abs(dacc) > kPoint + kGapTolerance) return dacc > 0.0;
  return a.macro_f1 - b.macro_f1 > kPoint + kGapTolerance;
}

}  // namespace

ConfidenceMatrix confidence_from_distances(const Matrix& d2, double epsilon) {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "semantic_confidence: epsilon must be finite and >= 0");
  require(d2.cols() >= 1, "semantic_confidence: no classes");
  ConfidenceMatrix out(Matrix::Zero(d2.rows(), d2.cols()));
  for (Eigen::Index j = 0; j < d2.rows(); ++j) {
    const auto shifted = (d2.row(j).array() + epsilon).eval();
    const double smallest = shifted.minCoeff();
    if (smallest == 0.0) {
      out.diverged[static_cast<std::size_t>(j)] = true;
      continue;
    }
    // Scaling by the smallest shifted distance keeps the terms in (0, 1].
    const auto w = (smallest / shifted).eval();
    out.scores.row(j) = w / w.sum();
  }
  return out;
}

ConfidenceMatrix semantic_confidence(const Matrix& outputs, const LabelVectorSet& vectors,
                                     double epsilon, std::vector<std::string>* warnings) {
  require(outputs.cols() == vectors.dim(), "semantic_confidence: output dimension " +
                                               std::to_string(outputs.cols()) +
                                               " does not match label vectors of dimension " +
                                               std::to_string(vectors.dim()));
  Matrix d2(outputs.rows(), vectors.n_classes());
  for (Eigen::Index j = 0; j < outputs.rows(); ++j) {
    for (int k = 0; k < vectors.n_classes(); ++k) d2(j, k) = (outputs.row(j) - vectors.V.row(k)).squaredNorm();
  }
  if (warnings && epsilon > 0.0) {
    const double gap = min_positive_gap(d2);
    if (std::isfinite(gap) && epsilon >= gap) {
      std::ostringstream os;
      os << "additive shift " << epsilon << " is not below the smallest distance gap " << gap;
      warnings->push_back(os.str());
    }
  }
  return confidence_from_distances(d2, epsilon);
}

ConfidenceMatrix uniform_confidence(Eigen::Index rows, int n_classes) {
  require(n_classes >= 1, "uniform_confidence: no classes");
  return ConfidenceMatrix(Matrix::Constant(rows, n_classes, 1.0 / n_classes));
}

Matrix fuse(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss) {
  check_shapes(fs, ss);
  return (fs.scores + ss.scores) / 2.0;
}

std::vector<int> fuse_and_decide_lenient(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss) {
  const Matrix overall = fuse(fs, ss);
  std::vector<int> out(static_cast<std::size_t>(overall.rows()));
  for (Eigen::Index j = 0; j < overall.rows(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    out[i] = ss.diverged[i] || fs.diverged[i] ? kNoLabel : argmax_lowest(overall.row(j));
  }
  return out;
}

std::vector<int> fuse_and_decide(const ConfidenceMatrix& fs, const ConfidenceMatrix& ss) {
  check_shapes(fs, ss);
  for (std::size_t i = 0; i < ss.diverged.size(); ++i) {
    if (ss.diverged[i] || fs.diverged[i]) {
      fail(ErrorCode::numeric, "fusion: row " + std::to_string(i) + " has diverged confidences");
    }
  }
  return fuse_and_decide_lenient(fs, ss);
}

ApproachResult run_feature_only(const Dataset& trainval, const Dataset& test, Algorithm algo,
                                const HyperparameterPoint& hyp, const ModelSettings& settings,
                                std::uint64_t seed) {
  ApproachResult r;
  r.classifier.emplace(train_classifier(algo, trainval, hyp, settings, feature_model_seed(seed)));
  r.predictions = r.classifier->predict(test.X);
  r.scores = score(test.y, r.predictions, test.n_classes());
  return r;
}

ApproachResult run_semantic_only(const Dataset& trainval, const Dataset& test, Algorithm algo,
                                 const HyperparameterPoint& hyp, const LabelVectorSet& vectors,
                                 const ModelSettings& settings, std::uint64_t seed) {
  ApproachResult r;
  r.regressor.emplace(train_regressor(algo, trainval, vectors, hyp, settings, semantic_model_seed(seed)));
  r.predictions = nearest_labels(r.regressor->predict(test.X), vectors);
  r.scores = score(test.y, r.predictions, test.n_classes());
  return r;
}

ApproachResult run_secret(const Dataset& trainval, const Dataset& test, const HyperparameterPoint& fs_hyp,
                          const HyperparameterPoint& ss_hyp, const LabelVectorSet& vectors,
                          const SecretConfig& cfg) {
  require(cfg.epsilon_decide > 0.0, "run_secret: decision shift must be positive");
  require(vectors.n_classes() == trainval.n_classes(), "run_secret: label vector count differs from class count");
  ApproachResult r;
  r.classifier.emplace(
      train_classifier(cfg.fs_algo, trainval, fs_hyp, cfg.settings, feature_model_seed(cfg.seed)));
  const auto fs_conf = r.classifier->confidence(test.X);
  ConfidenceMatrix ss_conf;
  if (cfg.uniform_semantic) {
    ss_conf = uniform_confidence(test.X.rows(), test.n_classes());
  } else {
    r.regressor.emplace(train_regressor(cfg.ss_algo, trainval, vectors, ss_hyp, cfg.settings,
                                        semantic_model_seed(cfg.seed)));
    ss_conf = semantic_confidence(r.regressor->predict(test.X), vectors, cfg.epsilon_decide, &r.warnings);
  }
  r.predictions = fuse_and_decide(fs_conf, ss_conf);
  r.scores = score(test.y, r.predictions, test.n_classes());
  return r;
}

EnsembleOutcome run_ensemble_baseline(const Dataset& train, const Dataset& validation,
                                      const Dataset& trainval, const Dataset& test,
                                      const EnsembleConfig& cfg) {
  EnsembleOutcome out;
  out.tuning = tune_ensemble_member(train, validation, cfg.first_algo, cfg.first_hyp, cfg.second_algo,
                                    cfg.second_space, cfg.tuning);
  const auto seed = cfg.tuning.seed;
  auto& r = out.result;
  r.classifier.emplace(
      train_classifier(cfg.first_algo, trainval, cfg.first_hyp, cfg.tuning.settings, feature_model_seed(seed)));
  r.partner.emplace(train_classifier(cfg.second_algo, trainval, out.tuning.best_point, cfg.tuning.settings,
                                     ensemble_model_seed(seed)));
  r.predictions = fuse_and_decide(r.classifier->confidence(test.X), r.partner->confidence(test.X));
  r.scores = score(test.y, r.predictions, test.n_classes());
  return out;
}

RegressorSelection select_regressor(const std::vector<CandidateScore>& candidates) {
  require(!candidates.empty(), "select_regressor: no candidates");
  RegressorSelection sel;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (beats(candidates[i], candidates[sel.chosen])) sel.chosen = i;
  }
  // The leader may still fail to separate from candidates it was never compared with.
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i == sel.chosen || !beats(candidates[sel.chosen], candidates[i])) sel.tied.push_back(i);
  }
  sel.inconclusive = sel.tied.size() > 1;
  return sel;
}

}  // namespace secret
