#include "secret/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace secret {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  require(dim > 0, "embedding dimension must be positive");
}

bool EmbeddingTable::contains(std::string_view word) const { return find(word) != nullptr; }

const double* EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return nullptr;
  return values_.data() + it->second * static_cast<std::size_t>(dim_);
}

bool EmbeddingTable::insert(std::string_view word, std::span<const double> vector) {
  require(static_cast<int>(vector.size()) == dim_, "embedding vector has the wrong dimension");
  const auto [it, inserted] = index_.emplace(to_lower(word), index_.size());
  if (!inserted) return false;
  values_.insert(values_.end(), vector.begin(), vector.end());
  return true;
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source,
                                std::vector<std::string>* warnings) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> buf;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (first) {
      first = false;
      if (tokens.size() == 2 && is_integer(tokens[0]) && is_integer(tokens[1])) continue;
    }
    const int dim = static_cast<int>(tokens.size()) - 1;
    if (dim <= 0) {
      fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": word without a vector");
    }
    if (table.dim() == 0) {
      table = EmbeddingTable(dim);
    } else if (dim != table.dim()) {
      fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": vector has " +
                                 std::to_string(dim) + " components, expected " +
                                 std::to_string(table.dim()));
    }
    buf.assign(static_cast<std::size_t>(dim), 0.0);
    for (int d = 0; d < dim; ++d) {
      const auto tok = tokens[static_cast<std::size_t>(d) + 1];
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), buf[static_cast<std::size_t>(d)]);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(buf[static_cast<std::size_t>(d)])) {
        fail(ErrorCode::parse, source + ":" + std::to_string(line_no) + ": cannot parse '" +
                                   std::string(tok) + "' as a real");
      }
    }
    if (!table.insert(tokens[0], buf) && warnings) {
      warnings->push_back(source + ":" + std::to_string(line_no) + ": duplicate word '" +
                          std::string(tokens[0]) + "' ignored");
    }
  }
  if (table.dim() == 0) fail(ErrorCode::parse, source + ": no vectors found");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  return parse_embeddings(in, path.string(), warnings);
}

std::vector<std::string> tokenize_label(std::string_view label) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : label) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c) || raw == '-') {
      flush();
    } else if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

Vector label_vector(std::string_view label, const EmbeddingTable& table) {
  const auto tokens = tokenize_label(label);
  if (tokens.empty()) {
    fail(ErrorCode::vocabulary, "label '" + std::string(label) + "' has no tokens");
  }
  std::string missing;
  Vector sum = Vector::Zero(table.dim());
  for (const auto& tok : tokens) {
    const double* v = table.find(tok);
    if (!v) {
      missing += missing.empty() ? tok : ", " + tok;
      continue;
    }
    sum += Eigen::Map<const Vector>(v, table.dim());
  }
  if (!missing.empty()) {
    fail(ErrorCode::vocabulary,
         "label '" + std::string(label) + "': out-of-vocabulary token(s): " + missing);
  }
  if (tokens.size() == 1) return sum;
  return sum / static_cast<double>(tokens.size());
}

void LabelVectorSet::validate() const {
  require(static_cast<int>(class_labels.size()) == n_classes(),
          "label vectors: row count differs from label count");
  require(dim() > 0, "label vectors: dimension must be positive");
  for (int i = 0; i < n_classes(); ++i) {
    for (int j = i + 1; j < n_classes(); ++j) {
      if (V.row(i) == V.row(j)) {
        fail(ErrorCode::vocabulary, "classes '" + class_labels[static_cast<std::size_t>(i)] +
                                        "' and '" + class_labels[static_cast<std::size_t>(j)] +
                                        "' map to the same semantic vector");
      }
    }
  }
}

LabelVectorSet make_label_vectors(std::span<const std::string> label_texts,
                                  const EmbeddingTable& table) {
  LabelVectorSet vs;
  vs.V.resize(static_cast<Eigen::Index>(label_texts.size()), table.dim());
  for (std::size_t k = 0; k < label_texts.size(); ++k) {
    vs.V.row(static_cast<Eigen::Index>(k)) = label_vector(label_texts[k], table).transpose();
    vs.class_labels.push_back(label_texts[k]);
  }
  vs.validate();
  return vs;
}

Matrix pairwise_squared_distances(const LabelVectorSet& vs) {
  const auto c = vs.V.rows();
  Matrix d = Matrix::Zero(c, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = i + 1; j < c; ++j) {
      d(i, j) = d(j, i) = (vs.V.row(i) - vs.V.row(j)).squaredNorm();
    }
  }
  return d;
}

}  // namespace secret
