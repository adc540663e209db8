#pragma once

#include "secret/analysis.hpp"
#include "secret/dataset.hpp"
#include "secret/embeddings.hpp"
#include "secret/fusion.hpp"
#include "secret/tuning.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace secret {

inline constexpr const char* kVersion = "0.1.0";

struct DatasetConfig {
  std::filesystem::path path;
  std::vector<ColumnKind> columns;
  std::vector<std::string> names;
  bool has_header = false;
  char delimiter = ',';
  bool standardize = true;
};

struct ApproachSet {
  bool secret = true;
  bool feature_only = true;
  bool semantic_only = false;
  bool ensemble = true;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  /// Raw label value -> text looked up in the embeddings. Also the place for
  /// synonym substitution. Labels missing here are looked up as written.
  std::map<std::string, std::string> label_texts;
  /// Word-vector file; alternatively `label_vectors` gives vectors inline.
  std::filesystem::path embeddings;
  std::map<std::string, std::vector<double>> label_vectors;

  int folds = 10;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
  Algorithm fs_algo = Algorithm::forest;
  /// More than one entry means the regressor is chosen per fold on validation.
  std::vector<Algorithm> ss_candidates{Algorithm::forest};
  Algorithm ensemble_algo = Algorithm::forest;
  HyperparameterSpace forest_space = default_space(Algorithm::forest);
  HyperparameterSpace perceptron_space = default_space(Algorithm::perceptron);
  int bo_iterations = 30;
  TuningMetric tuning_metric = TuningMetric::accuracy;
  double epsilon = kEpsilonDecide;
  ApproachSet approaches;
  ModelSettings settings;
  bool uniform_semantic = false;
  int jobs = 1;

  const HyperparameterSpace& space(Algorithm algo) const {
    return algo == Algorithm::forest ? forest_space : perceptron_space;
  }
  bool needs_vectors() const { return approaches.secret || approaches.semantic_only; }
};

/// Relative paths are resolved against `base_dir`. Unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Everything read from disk before any fold runs.
struct ExperimentInputs {
  RawTable table;
  LabelEncoding labels;
  std::vector<std::string> label_texts;
  std::optional<LabelVectorSet> vectors;
  std::vector<std::string> warnings;
};

ExperimentInputs load_inputs(const ExperimentConfig& cfg);
/// Builds label vectors for an in-memory table.
ExperimentInputs make_inputs(const ExperimentConfig& cfg, RawTable table,
                             const EmbeddingTable* embeddings = nullptr);

struct ApproachReport {
  std::string name;
  std::string algorithm;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::uint64_t split_hash = 0;
  std::vector<int> predictions;
};

struct SelectionReport {
  std::vector<CandidateScore> candidates;
  std::string chosen;
  bool inconclusive = false;
  std::vector<std::string> tied;
};

struct FoldReport {
  int fold = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_hash = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
  std::vector<int> test_labels;
  HyperparameterPoint fs_hyperparameters;
  std::map<std::string, HyperparameterPoint> ss_hyperparameters;
  std::map<std::string, TuningOutcome> tuning;
  std::optional<SelectionReport> selection;
  std::vector<ApproachReport> approaches;
  std::optional<DepthReport> depth_traditional;
  std::optional<DepthReport> depth_secret;
  std::vector<std::string> warnings;
};

struct ApproachSummary {
  std::string name;
  int n_folds = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
};

struct ExperimentReport {
  std::string version = kVersion;
  nlohmann::json config;
  std::vector<std::string> class_labels;
  std::vector<std::string> label_texts;
  std::vector<FoldReport> folds;
  std::vector<ApproachSummary> summary;
  std::optional<DepthComparison> depth;
  std::vector<std::string> warnings;

  const ApproachSummary* find_summary(std::string_view name) const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& inputs);

/// Mean and sample standard deviation per approach name.
std::vector<ApproachSummary> summarize(const std::vector<FoldReport>& folds);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(std::string_view name);

/// JSON is the whole report; CSV is one row per (fold, approach).
std::string format_report(const ExperimentReport& report, ReportFormat format);
void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format);

struct DatasetSummary {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::string> class_labels;
  std::vector<std::string> label_texts;
  std::vector<std::size_t> class_counts;
  int vector_dim = 0;
  std::vector<std::string> warnings;
};

/// Loads every input and checks fold feasibility and vocabulary coverage.
DatasetSummary validate_config(const ExperimentConfig& cfg);
nlohmann::json summary_to_json(const DatasetSummary& s);

struct LabelDistances {
  std::vector<std::string> class_labels;
  std::vector<std::string> label_texts;
  /// Euclidean distances between label vectors.
  Matrix distances;
};

LabelDistances label_distances(const ExperimentConfig& cfg);
std::string format_distances(const LabelDistances& d, ReportFormat format);

}  // namespace secret
