#include "fixtures.hpp"

#include <cstdio>
#include <map>

namespace secret::testing {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RawTable three_class_table(const ThreeClassSpec& spec) {
  RawTable t;
  const int p = 2 + spec.noise_features;
  for (int j = 0; j < p; ++j) {
    t.column_names.push_back("x" + std::to_string(j));
    t.column_kinds.push_back(ColumnKind::numeric);
  }
  t.column_names.push_back("label");
  t.column_kinds.push_back(ColumnKind::label);
  Rng rng(spec.seed);
  const char* names[] = {"alpha", "beta", "gamma"};
  const double cx[] = {6.0, 0.0, spec.overlap_shift};
  const double cy[] = {6.0, 0.0, 0.0};
  for (int i = 0; i < spec.per_class; ++i) {
    for (int c = 0; c < 3; ++c) {
      std::vector<std::string> row;
      row.push_back(num(cx[c] + spec.spread * rng.normal()));
      row.push_back(num(cy[c] + spec.spread * rng.normal()));
      for (int j = 0; j < spec.noise_features; ++j) row.push_back(num(rng.normal()));
      row.push_back(names[c]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::map<std::string, std::vector<double>> three_class_vectors(double bc_distance, double a_distance) {
  return {{"alpha", {a_distance, a_distance / 2.0, 0.0}},
          {"beta", {0.0, 0.0, 0.0}},
          {"gamma", {bc_distance, 0.0, 0.0}}};
}

RawTable separable_table(int per_class, std::uint64_t seed) {
  RawTable t;
  t.column_names = {"x", "y", "label"};
  t.column_kinds = {ColumnKind::numeric, ColumnKind::numeric, ColumnKind::label};
  Rng rng(seed);
  for (int i = 0; i < per_class; ++i) {
    t.rows.push_back({num(-3.0 + 0.5 * rng.normal()), num(rng.normal()), "left"});
    t.rows.push_back({num(3.0 + 0.5 * rng.normal()), num(rng.normal()), "right"});
  }
  return t;
}

}  // namespace secret::testing
