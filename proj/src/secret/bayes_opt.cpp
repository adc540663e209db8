#include "secret/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace secret {
namespace {

constexpr std::uint64_t kMaxEnumeration = 1'000'000;

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

unsigned nth_prime(std::size_t n) {
  static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
  require(n < std::size(primes), "bayesian_optimize: too many dimensions");
  return primes[n];
}

struct Candidate {
  Vector unit;
  double score;
  std::size_t order;
};

}  // namespace

HyperparameterSpace::HyperparameterSpace(std::vector<ParameterRange> dims) : dims_(std::move(dims)) {
  for (const auto& d : dims_) check(d);
}

void HyperparameterSpace::check(const ParameterRange& r) const {
  require(!r.name.empty(), "hyperparameter needs a name");
  require(r.lower <= r.upper, "hyperparameter '" + r.name + "': lower bound exceeds upper bound");
  if (r.kind == ParameterKind::integer) {
    require(std::floor(r.lower) == r.lower && std::floor(r.upper) == r.upper,
            "hyperparameter '" + r.name + "': integer bounds must be integral");
  }
}

HyperparameterSpace& HyperparameterSpace::add_integer(std::string name, long lower, long upper) {
  ParameterRange r{std::move(name), ParameterKind::integer, static_cast<double>(lower),
                   static_cast<double>(upper)};
  check(r);
  dims_.push_back(std::move(r));
  return *this;
}

HyperparameterSpace& HyperparameterSpace::add_real(std::string name, double lower, double upper) {
  ParameterRange r{std::move(name), ParameterKind::real, lower, upper};
  check(r);
  dims_.push_back(std::move(r));
  return *this;
}

bool HyperparameterSpace::integer_only() const {
  return std::all_of(dims_.begin(), dims_.end(),
                     [](const auto& d) { return d.kind == ParameterKind::integer; });
}

std::optional<std::uint64_t> HyperparameterSpace::grid_size() const {
  if (!integer_only()) return std::nullopt;
  std::uint64_t total = 1;
  for (const auto& d : dims_) {
    const auto n = static_cast<std::uint64_t>(d.upper - d.lower) + 1;
    if (total > std::numeric_limits<std::uint64_t>::max() / n) return std::nullopt;
    total *= n;
  }
  return total;
}

// Integer dimensions split the unit interval into equal bins, one per value.
HyperparameterPoint HyperparameterSpace::decode(const Eigen::Ref<const Vector>& unit) const {
  require(unit.size() == static_cast<Eigen::Index>(dims_.size()), "decode: dimension mismatch");
  HyperparameterPoint point;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    const double u = std::clamp(unit(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    if (d.kind == ParameterKind::integer) {
      const double count = d.upper - d.lower + 1.0;
      point[d.name] = std::min(d.upper, d.lower + std::floor(u * count));
    } else {
      point[d.name] = d.lower + u * (d.upper - d.lower);
    }
  }
  return point;
}

Vector HyperparameterSpace::encode(const HyperparameterPoint& point) const {
  Vector unit(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    const auto it = point.find(d.name);
    require(it != point.end(), "encode: point lacks '" + d.name + "'");
    double u;
    if (d.kind == ParameterKind::integer) {
      u = (it->second - d.lower + 0.5) / (d.upper - d.lower + 1.0);
    } else {
      u = d.upper > d.lower ? (it->second - d.lower) / (d.upper - d.lower) : 0.5;
    }
    unit(static_cast<Eigen::Index>(i)) = u;
  }
  return unit;
}

std::vector<HyperparameterPoint> HyperparameterSpace::enumerate() const {
  const auto size = grid_size();
  require(size.has_value(), "enumerate: space is not a finite integer grid");
  std::vector<HyperparameterPoint> out;
  out.reserve(static_cast<std::size_t>(*size));
  HyperparameterPoint current;
  for (const auto& d : dims_) current[d.name] = d.lower;
  for (std::uint64_t i = 0; i < *size; ++i) {
    out.push_back(current);
    for (std::size_t j = dims_.size(); j-- > 0;) {
      auto& v = current[dims_[j].name];
      if (v < dims_[j].upper) {
        v += 1.0;
        break;
      }
      v = dims_[j].lower;
    }
  }
  return out;
}

TuningResult bayesian_optimize(const Objective& objective, const HyperparameterSpace& space,
                               int budget, std::uint64_t seed, const BayesOptOptions& options) {
  require(budget >= 1, "bayesian_optimize: budget must be at least 1");
  require(space.size() >= 1, "bayesian_optimize: empty hyperparameter space");
  const auto d = static_cast<Eigen::Index>(space.size());
  const auto grid = space.grid_size();

  TuningResult result;
  std::set<HyperparameterPoint> seen;
  auto exhausted = [&] { return grid && seen.size() >= *grid; };
  auto finish = [&] {
    result.best_objective = -std::numeric_limits<double>::infinity();
    for (const auto& obs : result.history) {
      if (result.best_point.empty() || obs.objective > result.best_objective) {
        result.best_objective = obs.objective;
        result.best_point = obs.point;
      }
    }
  };
  auto evaluate = [&](const HyperparameterPoint& point) {
    double value;
    try {
      value = objective(point);
    } catch (const Error& e) {
      finish();
      throw TuningAborted(e.code(), e.what(), result);
    } catch (const std::exception& e) {
      finish();
      throw TuningAborted(ErrorCode::numeric, std::string("objective failed: ") + e.what(), result);
    }
    seen.insert(point);
    result.history.push_back({point, value});
  };

  // Space-filling start: Halton points under a random shift.
  Rng init_rng(mix_seed(seed, "init"));
  Vector shift(d);
  for (Eigen::Index i = 0; i < d; ++i) shift(i) = init_rng.uniform();
  const auto n_initial = static_cast<std::size_t>(std::min(std::max(options.n_initial, 1), budget));
  std::uint64_t halton_index = 1;
  std::size_t misses = 0;
  while (result.history.size() < n_initial && !exhausted() && misses < 10000) {
    Vector u(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h = radical_inverse(halton_index, nth_prime(static_cast<std::size_t>(i))) + shift(i);
      u(i) = h - std::floor(h);
    }
    ++halton_index;
    const auto point = space.decode(u);
    if (seen.count(point)) {
      ++misses;
      continue;
    }
    evaluate(point);
  }

  for (int iter = 0; static_cast<int>(result.history.size()) < budget && !exhausted(); ++iter) {
    const auto n = static_cast<Eigen::Index>(result.history.size());
    Matrix X(n, d);
    Vector y(n);
    double finite_min = std::numeric_limits<double>::infinity();
    for (const auto& obs : result.history) {
      if (std::isfinite(obs.objective)) finite_min = std::min(finite_min, obs.objective);
    }
    if (!std::isfinite(finite_min)) finite_min = 0.0;
    double best_y = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& obs = result.history[static_cast<std::size_t>(i)];
      X.row(i) = space.encode(obs.point).transpose();
      y(i) = std::isfinite(obs.objective) ? obs.objective : finite_min;
      best_y = std::max(best_y, y(i));
    }
    GaussianProcess gp(options.gp);
    gp.fit(X, y, mix_seed(seed, 2 * static_cast<std::uint64_t>(iter) + 1));
    auto acquisition = [&](const Vector& u) {
      const auto p = gp.predict(space.snap(u));
      return expected_improvement(p.mean, p.variance, best_y);
    };

    Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(iter) + 2));
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(options.n_candidates + options.n_refine));
    for (int c = 0; c < options.n_candidates; ++c) {
      Vector u(d);
      for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.uniform();
      candidates.push_back({u, acquisition(u), candidates.size()});
    }
    // Local pattern search from the best few random candidates.
    std::vector<std::size_t> top(candidates.size());
    std::iota(top.begin(), top.end(), std::size_t{0});
    const auto n_top = std::min(top.size(), static_cast<std::size_t>(std::max(options.n_refine, 0)));
    std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(n_top), top.end(),
                      [&](auto a, auto b) { return candidates[a].score > candidates[b].score; });
    for (std::size_t t = 0; t < n_top; ++t) {
      Vector u = candidates[top[t]].unit;
      double score = candidates[top[t]].score;
      for (double step = 0.1; step > 1e-3;) {
        bool improved = false;
        for (Eigen::Index i = 0; i < d && !improved; ++i) {
          for (double sign : {1.0, -1.0}) {
            Vector v = u;
            v(i) = std::clamp(v(i) + sign * step, 0.0, 1.0);
            const double s = acquisition(v);
            if (s > score) {
              u = v;
              score = s;
              improved = true;
              break;
            }
          }
        }
        if (!improved) step /= 2.0;
      }
      candidates.push_back({u, score, candidates.size()});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    std::optional<HyperparameterPoint> next;
    for (const auto& c : candidates) {
      auto point = space.decode(c.unit);
      if (!seen.count(point)) {
        next = std::move(point);
        break;
      }
    }
    if (!next && options.exhaustive_fallback && grid && *grid <= kMaxEnumeration) {
      double best_score = -1.0;
      for (auto& point : space.enumerate()) {
        if (seen.count(point)) continue;
        const double s = acquisition(space.encode(point));
        if (s > best_score) {
          best_score = s;
          next = point;
        }
      }
    }
    for (int tries = 0; !next && tries < 1000; ++tries) {
      Vector u(d);
      for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.uniform();
      auto point = space.decode(u);
      if (!seen.count(point)) next = std::move(point);
    }
    if (!next) break;
    evaluate(*next);
  }
  finish();
  return result;
}

}  // namespace secret
