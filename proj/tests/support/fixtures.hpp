#pragma once

#include "secret/dataset.hpp"
#include "secret/embeddings.hpp"

#include <map>
#include <string>
#include <vector>

namespace secret::testing {

/// Three classes: A far from the others, B and C overlapping. Label values
/// are "alpha", "beta", "gamma" for A, B, C.
struct ThreeClassSpec {
  int per_class = 60;
  double overlap_shift = 1.0;  // distance between the B and C centres
  double spread = 1.0;
  int noise_features = 2;
  std::uint64_t seed = 0;
};

RawTable three_class_table(const ThreeClassSpec& spec);

/// Label vectors with B and C close together and A far away.
std::map<std::string, std::vector<double>> three_class_vectors(double bc_distance = 0.5,
                                                               double a_distance = 6.0);

/// Two well-separated classes on a single informative feature.
RawTable separable_table(int per_class, std::uint64_t seed);

}  // namespace secret::testing
