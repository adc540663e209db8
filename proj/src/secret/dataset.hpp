#pragma once

#include "secret/common.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace secret {

enum class ColumnKind { numeric, categorical, label, ignore };

ColumnKind parse_column_kind(std::string_view name);
std::string_view to_string(ColumnKind kind);

struct CsvOptions {
  char delimiter = ',';
  bool has_header = false;
};

/// Cells exactly as read. Numeric cells are checked to parse at load time,
/// so a missing or garbled value rejects the whole file.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::vector<std::string>> rows;

  std::size_t label_column() const;
  std::size_t size() const { return rows.size(); }
};

RawTable load_csv(const std::filesystem::path& path, std::span<const ColumnKind> schema,
                  const CsvOptions& options = {});
RawTable parse_csv(std::istream& in, std::span<const ColumnKind> schema, const CsvOptions& options,
                   const std::string& source = "<stream>");

/// Label text <-> class id. Ids follow lexicographic order of the raw label
/// values so the mapping does not depend on row order.
class LabelEncoding {
 public:
  LabelEncoding() = default;
  static LabelEncoding from_table(const RawTable& table);
  explicit LabelEncoding(std::vector<std::string> labels);

  int id(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }
  int n_classes() const { return static_cast<int>(labels_.size()); }
  std::vector<int> encode(const RawTable& table) const;

 private:
  std::vector<std::string> labels_;
};

struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> class_labels;

  int n_classes() const { return static_cast<int>(class_labels.size()); }
  std::size_t size() const { return y.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(X.cols()); }

  Dataset subset(std::span<const std::size_t> indices) const;
  /// Throws unless every class occurs, ids are in range and X is finite.
  void validate() const;
};

/// Standardizes numeric columns and one-hot encodes categorical ones. Fit on
/// one set of rows, then apply the frozen statistics to any other rows.
class FeatureEncoder {
 public:
  static FeatureEncoder fit(const RawTable& table, std::span<const std::size_t> rows,
                            bool standardize = true);

  Matrix transform(const RawTable& table, std::span<const std::size_t> rows,
                   std::vector<std::string>* warnings = nullptr) const;

  std::size_t output_dim() const { return output_dim_; }
  std::vector<std::string> feature_names() const;
  /// Warnings raised while fitting (zero-variance columns).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Column {
    std::size_t source = 0;
    ColumnKind kind = ColumnKind::numeric;
    std::string name;
    double mean = 0.0;
    double scale = 1.0;  // 0 marks a zero-variance column
    std::vector<std::string> categories;
  };
  std::vector<Column> columns_;
  std::size_t output_dim_ = 0;
  std::vector<std::string> warnings_;
};

struct PreprocessOptions {
  bool standardize = true;
};

/// Fits the encoder on every row of the table and applies it to the same rows.
Dataset preprocess(const RawTable& table, const PreprocessOptions& options = {},
                   std::vector<std::string>* warnings = nullptr);

/// Encode `apply_rows` with statistics fitted on `fit_rows`.
Dataset preprocess_rows(const RawTable& table, const LabelEncoding& labels,
                        std::span<const std::size_t> fit_rows,
                        std::span<const std::size_t> apply_rows,
                        const PreprocessOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct SplitPlan {
  std::vector<Fold> folds;
  int k = 0;
  std::uint64_t seed = 0;
};

SplitPlan stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed);
inline SplitPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  return stratified_kfold(ds.y, ds.n_classes(), k, seed);
}

/// Stratified split of `train_indices` into (train, validation). Every class
/// keeps at least one member on each side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(
    std::span<const std::size_t> train_indices, std::span<const int> y, int n_classes,
    double fraction, std::uint64_t seed);

/// FNV-1a over an index list; used to prove that approaches shared a split.
std::uint64_t hash_indices(std::span<const std::size_t> indices);

/// The four views one cross-validation fold needs: train/validation for
/// tuning (encoder fit on train) and train+validation/test for the final
/// models (encoder fit on train+validation).
struct FoldData {
  Dataset train;
  Dataset validation;
  Dataset trainval;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
};

FoldData prepare_fold(const RawTable& table, const LabelEncoding& labels, const Fold& fold,
                      double validation_fraction, std::uint64_t seed,
                      const PreprocessOptions& options = {},
                      std::vector<std::string>* warnings = nullptr);

}  // namespace secret
