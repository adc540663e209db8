#pragma once

#include "secret/common.hpp"

#include <vector>

namespace secret {

/// Instances x classes matrix of scores. Valid rows are probability vectors.
/// A semantic row computed without additive shift whose prediction landed
/// exactly on a label vector is flagged `diverged` and holds zeros.
struct ConfidenceMatrix {
  Matrix scores;
  std::vector<bool> diverged;

  ConfidenceMatrix() = default;
  explicit ConfidenceMatrix(Matrix s)
      : scores(std::move(s)), diverged(static_cast<std::size_t>(scores.rows()), false) {}

  Eigen::Index rows() const { return scores.rows(); }
  int n_classes() const { return static_cast<int>(scores.cols()); }
  bool any_diverged() const {
    for (bool d : diverged) {
      if (d) return true;
    }
    return false;
  }
};

}  // namespace secret
