#pragma once

#include "secret/common.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace secret {

/// Pretrained word vectors, keyed by lowercase word.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool contains(std::string_view word) const;
  /// Null when the word is not in the table.
  const double* find(std::string_view word) const;
  /// Returns false (and keeps the existing vector) when the word is already present.
  bool insert(std::string_view word, std::span<const double> vector);

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> values_;
};

/// Reads the "word v1 ... vD" text format. A leading "count dim" header line
/// (word2vec text files) is skipped. Duplicate words keep the first vector.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string>* warnings = nullptr);
EmbeddingTable parse_embeddings(std::istream& in, const std::string& source = "<stream>",
                                std::vector<std::string>* warnings = nullptr);

/// Lowercase, split on whitespace and hyphens, drop punctuation.
std::vector<std::string> tokenize_label(std::string_view label);

/// Mean of the token vectors of `label`. Throws ErrorCode::vocabulary naming
/// every missing token.
Vector label_vector(std::string_view label, const EmbeddingTable& table);

/// Row k holds the semantic vector of class k.
struct LabelVectorSet {
  Matrix V;
  std::vector<std::string> class_labels;

  int n_classes() const { return static_cast<int>(V.rows()); }
  int dim() const { return static_cast<int>(V.cols()); }
  /// Rejects identical rows; two classes with the same vector cannot be told apart.
  void validate() const;
};

/// `label_texts[k]` is the text looked up for class k (after any synonym remap).
LabelVectorSet make_label_vectors(std::span<const std::string> label_texts,
                                  const EmbeddingTable& table);

/// Entry (i, j) = squared Euclidean distance between rows i and j of V.
Matrix pairwise_squared_distances(const LabelVectorSet& vs);

}  // namespace secret
