#pragma once

#include "secret/common.hpp"
#include "secret/gaussian_process.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace secret {

using HyperparameterPoint = std::map<std::string, double>;

enum class ParameterKind { integer, real };

struct ParameterRange {
  std::string name;
  ParameterKind kind = ParameterKind::integer;
  double lower = 0.0;
  double upper = 0.0;
};

class HyperparameterSpace {
 public:
  HyperparameterSpace() = default;
  explicit HyperparameterSpace(std::vector<ParameterRange> dims);

  HyperparameterSpace& add_integer(std::string name, long lower, long upper);
  HyperparameterSpace& add_real(std::string name, double lower, double upper);

  const std::vector<ParameterRange>& dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  bool integer_only() const;
  /// Number of distinct points for integer-only spaces.
  std::optional<std::uint64_t> grid_size() const;

  /// Maps unit-cube coordinates to a point, rounding integer dimensions.
  HyperparameterPoint decode(const Eigen::Ref<const Vector>& unit) const;
  /// Unit-cube coordinates of a point (inverse of decode on snapped points).
  Vector encode(const HyperparameterPoint& point) const;
  /// Round-trips through the grid so integer dimensions sit on their values.
  Vector snap(const Eigen::Ref<const Vector>& unit) const { return encode(decode(unit)); }
  /// All points of an integer-only space, in lexicographic order.
  std::vector<HyperparameterPoint> enumerate() const;

 private:
  void check(const ParameterRange& r) const;
  std::vector<ParameterRange> dims_;
};

struct Observation {
  HyperparameterPoint point;
  double objective = 0.0;
};

struct TuningResult {
  HyperparameterPoint best_point;
  double best_objective = 0.0;
  std::vector<Observation> history;
};

/// Raised when the objective throws; carries what was evaluated before.
class TuningAborted : public Error {
 public:
  TuningAborted(ErrorCode code, const std::string& what, TuningResult partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const TuningResult& partial() const { return partial_; }

 private:
  TuningResult partial_;
};

struct BayesOptOptions {
  int n_initial = 5;
  int n_candidates = 1000;
  /// Top candidates refined by local pattern search.
  int n_refine = 5;
  /// When every candidate rounds to an evaluated point, fall back to the
  /// unevaluated grid points of an integer-only space.
  bool exhaustive_fallback = true;
  GpOptions gp;
};

using Objective = std::function<double(const HyperparameterPoint&)>;

/// Maximizes `objective`. The first min(n_initial, budget) points come from a
/// randomly shifted Halton sequence, the rest maximize expected improvement
/// under a Matern 5/2 GP. The sequence of evaluated points does not depend
/// on the budget, so a larger budget extends a smaller one. Stops early only
/// when an integer-only space has no unevaluated point left.
TuningResult bayesian_optimize(const Objective& objective, const HyperparameterSpace& space,
                               int budget, std::uint64_t seed, const BayesOptOptions& options = {});

}  // namespace secret
