#include "secret/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace secret {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delimiter && !quoted) {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

bool parse_real(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

double parse_cell(const std::string& cell) {
  double v = 0.0;
  parse_real(cell, v);
  return v;
}

}  // namespace

ColumnKind parse_column_kind(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "numeric") return ColumnKind::numeric;
  if (lower == "categorical") return ColumnKind::categorical;
  if (lower == "label") return ColumnKind::label;
  if (lower == "ignore") return ColumnKind::ignore;
  fail(ErrorCode::config, "unknown column kind '" + std::string(name) + "'");
}

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::label: return "label";
    case ColumnKind::ignore: return "ignore";
  }
  return "?";
}

std::size_t RawTable::label_column() const {
  const auto it = std::find(column_kinds.begin(), column_kinds.end(), ColumnKind::label);
  require(it != column_kinds.end(), "table has no label column");
  return static_cast<std::size_t>(it - column_kinds.begin());
}

RawTable parse_csv(std::istream& in, std::span<const ColumnKind> schema, const CsvOptions& options,
                   const std::string& source) {
  if (std::count(schema.begin(), schema.end(), ColumnKind::label) != 1) {
    fail(ErrorCode::config, "schema must tag exactly one column as label");
  }
  RawTable table;
  table.column_kinds.assign(schema.begin(), schema.end());

  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, options.delimiter);
    if (header_pending) {
      header_pending = false;
      if (cells.size() != schema.size()) {
        fail(ErrorCode::parse, source + ": header has " + std::to_string(cells.size()) +
                                   " columns but the schema has " + std::to_string(schema.size()));
      }
      table.column_names = std::move(cells);
      continue;
    }
    if (cells.size() != schema.size()) {
      fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": row has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (schema[c] == ColumnKind::numeric && !parse_real(cells[c], v)) {
        fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": column " +
                                   std::to_string(c) + " is not a finite number: '" + cells[c] +
                                   "'");
      }
      if (schema[c] == ColumnKind::label && cells[c].empty()) {
        fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": empty label");
      }
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.column_names.empty()) {
    for (std::size_t c = 0; c < schema.size(); ++c) table.column_names.push_back("c" + std::to_string(c));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, std::span<const ColumnKind> schema,
                  const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  return parse_csv(in, schema, options, path.string());
}

LabelEncoding::LabelEncoding(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  require(!labels_.empty(), "label encoding needs at least one class");
}

LabelEncoding LabelEncoding::from_table(const RawTable& table) {
  const auto col = table.label_column();
  std::set<std::string> seen;
  for (const auto& row : table.rows) seen.insert(row[col]);
  return LabelEncoding({seen.begin(), seen.end()});
}

int LabelEncoding::id(std::string_view label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    fail(ErrorCode::invalid_argument, "unknown class label '" + std::string(label) + "'");
  }
  return static_cast<int>(it - labels_.begin());
}

std::vector<int> LabelEncoding::encode(const RawTable& table) const {
  const auto col = table.label_column();
  std::vector<int> y;
  y.reserve(table.size());
  for (const auto& row : table.rows) y.push_back(id(row[col]));
  return y;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.class_labels = class_labels;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
  out.y.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(indices[i]));
    out.y.push_back(y[indices[i]]);
  }
  return out;
}

void Dataset::validate() const {
  require(static_cast<std::size_t>(X.rows()) == y.size(), "dataset: X rows and y length differ");
  require(n_classes() > 0, "dataset: no classes");
  std::vector<int> counts(static_cast<std::size_t>(n_classes()), 0);
  for (int c : y) {
    require(c >= 0 && c < n_classes(), "dataset: class id out of range");
    ++counts[static_cast<std::size_t>(c)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    require(counts[k] > 0, "dataset: class '" + class_labels[k] + "' has no instances");
  }
  require(X.allFinite(), "dataset: X contains non-finite entries");
}

FeatureEncoder FeatureEncoder::fit(const RawTable& table, std::span<const std::size_t> rows,
                                   bool standardize) {
  require(!rows.empty(), "feature encoder: no rows to fit on");
  FeatureEncoder enc;
  for (std::size_t c = 0; c < table.column_kinds.size(); ++c) {
    const auto kind = table.column_kinds[c];
    if (kind == ColumnKind::label || kind == ColumnKind::ignore) continue;
    Column col;
    col.source = c;
    col.kind = kind;
    col.name = c < table.column_names.size() ? table.column_names[c] : "c" + std::to_string(c);
    if (kind == ColumnKind::numeric) {
      double sum = 0.0;
      for (auto r : rows) sum += parse_cell(table.rows[r][c]);
      const double n = static_cast<double>(rows.size());
      const double mean = sum / n;
      double ss = 0.0;
      for (auto r : rows) {
        const double d = parse_cell(table.rows[r][c]) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / n);
      if (!standardize) {
        col.mean = 0.0;
        col.scale = 1.0;
      } else if (sd > 0.0) {
        col.mean = mean;
        col.scale = sd;
      } else {
        col.mean = mean;
        col.scale = 0.0;
        enc.warnings_.push_back("column '" + col.name + "' has zero variance; encoded as zeros");
      }
      enc.output_dim_ += 1;
    } else {
      std::set<std::string> cats;
      for (auto r : rows) cats.insert(table.rows[r][c]);
      col.categories.assign(cats.begin(), cats.end());
      enc.output_dim_ += col.categories.size();
    }
    enc.columns_.push_back(std::move(col));
  }
  return enc;
}

Matrix FeatureEncoder::transform(const RawTable& table, std::span<const std::size_t> rows,
                                 std::vector<std::string>* warnings) const {
  Matrix X = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(output_dim_));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = table.rows[rows[i]];
    Eigen::Index out = 0;
    for (const auto& col : columns_) {
      if (col.kind == ColumnKind::numeric) {
        const double v = parse_cell(row[col.source]);
        X(static_cast<Eigen::Index>(i), out) = col.scale > 0.0 ? (v - col.mean) / col.scale : 0.0;
        out += 1;
      } else {
        const auto& cell = row[col.source];
        const auto it = std::lower_bound(col.categories.begin(), col.categories.end(), cell);
        if (it != col.categories.end() && *it == cell) {
          X(static_cast<Eigen::Index>(i), out + (it - col.categories.begin())) = 1.0;
        } else if (warnings) {
          warnings->push_back("column '" + col.name + "': unseen category '" + cell +
                              "' encoded as all zeros");
        }
        out += static_cast<Eigen::Index>(col.categories.size());
      }
    }
  }
  return X;
}

std::vector<std::string> FeatureEncoder::feature_names() const {
  std::vector<std::string> names;
  for (const auto& col : columns_) {
    if (col.kind == ColumnKind::numeric) {
      names.push_back(col.name);
    } else {
      for (const auto& cat : col.categories) names.push_back(col.name + "=" + cat);
    }
  }
  return names;
}

namespace {

Dataset encode_rows(const RawTable& table, const LabelEncoding& labels,
                    const FeatureEncoder& encoder, std::span<const std::size_t> rows,
                    std::vector<std::string>* warnings) {
  Dataset ds;
  ds.X = encoder.transform(table, rows, warnings);
  ds.class_labels = labels.labels();
  const auto col = table.label_column();
  ds.y.reserve(rows.size());
  for (auto r : rows) ds.y.push_back(labels.id(table.rows[r][col]));
  return ds;
}

void append(std::vector<std::string>* warnings, const std::vector<std::string>& more) {
  if (warnings) warnings->insert(warnings->end(), more.begin(), more.end());
}

}  // namespace

Dataset preprocess_rows(const RawTable& table, const LabelEncoding& labels,
                        std::span<const std::size_t> fit_rows,
                        std::span<const std::size_t> apply_rows, const PreprocessOptions& options,
                        std::vector<std::string>* warnings) {
  const auto encoder = FeatureEncoder::fit(table, fit_rows, options.standardize);
  append(warnings, encoder.warnings());
  return encode_rows(table, labels, encoder, apply_rows, warnings);
}

Dataset preprocess(const RawTable& table, const PreprocessOptions& options,
                   std::vector<std::string>* warnings) {
  std::vector<std::size_t> all(table.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return preprocess_rows(table, LabelEncoding::from_table(table), all, all, options, warnings);
}

SplitPlan stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed) {
  require(k >= 2, "stratified_kfold: k must be at least 2");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < y.size(); ++i) {
    require(y[i] >= 0 && y[i] < n_classes, "stratified_kfold: class id out of range");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }
  for (int c = 0; c < n_classes; ++c) {
    const auto n = by_class[static_cast<std::size_t>(c)].size();
    if (n < static_cast<std::size_t>(k)) {
      fail(ErrorCode::invalid_argument, "stratified_kfold: class " + std::to_string(c) + " has " +
                                            std::to_string(n) + " instances, fewer than k=" +
                                            std::to_string(k));
    }
  }

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> test(static_cast<std::size_t>(k));
  // Round-robin per class; the running offset keeps fold sizes within one.
  std::size_t offset = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) {
      test[(offset + j) % static_cast<std::size_t>(k)].push_back(members[j]);
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }

  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::vector<int> fold_of(y.size(), -1);
  for (int f = 0; f < k; ++f) {
    for (auto i : test[static_cast<std::size_t>(f)]) fold_of[i] = f;
  }
  for (int f = 0; f < k; ++f) {
    Fold fold;
    for (std::size_t i = 0; i < y.size(); ++i) {
      (fold_of[i] == f ? fold.test : fold.train).push_back(i);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(
    std::span<const std::size_t> train_indices, std::span<const int> y, int n_classes,
    double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, "train_val_split: fraction must be in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (auto i : train_indices) {
    require(i < y.size(), "train_val_split: index out of range");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> train, val;
  for (int c = 0; c < n_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.empty()) continue;  // class absent from this training pool
    if (members.size() < 2) {
      fail(ErrorCode::invalid_argument,
           "train_val_split: class " + std::to_string(c) +
               " has a single training member and would vanish from one side");
    }
    rng.shuffle(members);
    const auto n = members.size();
    auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {std::move(train), std::move(val)};
}

std::uint64_t hash_indices(std::span<const std::size_t> indices) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto i : indices) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(i) >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

FoldData prepare_fold(const RawTable& table, const LabelEncoding& labels, const Fold& fold,
                      double validation_fraction, std::uint64_t seed,
                      const PreprocessOptions& options, std::vector<std::string>* warnings) {
  const auto y = labels.encode(table);
  auto [train_rows, val_rows] =
      train_val_split(fold.train, y, labels.n_classes(), validation_fraction, seed);
  FoldData data;
  const auto tuning_encoder = FeatureEncoder::fit(table, train_rows, options.standardize);
  append(warnings, tuning_encoder.warnings());
  data.train = encode_rows(table, labels, tuning_encoder, train_rows, warnings);
  data.validation = encode_rows(table, labels, tuning_encoder, val_rows, warnings);
  const auto final_encoder = FeatureEncoder::fit(table, fold.train, options.standardize);
  append(warnings, final_encoder.warnings());
  data.trainval = encode_rows(table, labels, final_encoder, fold.train, warnings);
  data.test = encode_rows(table, labels, final_encoder, fold.test, warnings);
  data.train_rows = std::move(train_rows);
  data.validation_rows = std::move(val_rows);
  data.test_rows = fold.test;
  return data;
}

}  // namespace secret
