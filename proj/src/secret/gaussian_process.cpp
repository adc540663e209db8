#include "secret/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace secret {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Minimizes f over R^n from x0. Plain Nelder-Mead with standard coefficients.
template <typename F>
Vector nelder_mead(F f, Vector x0, double step, int max_iters) {
  const auto n = x0.size();
  std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(simplex.size());
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += step;
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  for (int iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) < 1e-9 * (1.0 + std::abs(values[best]))) break;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(n);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Vector contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      if (fc < values[worst]) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

}  // namespace

double Matern52::operator()(const Eigen::Ref<const Vector>& a,
                            const Eigen::Ref<const Vector>& b) const {
  const double r = ((a - b).array() / length_scales.array()).matrix().norm();
  const double s = std::sqrt(5.0) * r;
  return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double GaussianProcess::evaluate_log_likelihood(const Matern52& kernel) const {
  const auto n = points_.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = kernel(points_.row(i).transpose(), points_.row(j).transpose());
    K(i, i) += options_.noise;
  }
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Vector alpha = llt.solve(standardized_);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * standardized_.dot(alpha) - 0.5 * log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

bool GaussianProcess::factorize(const Matern52& kernel) {
  const auto n = points_.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = kernel(points_.row(i).transpose(), points_.row(j).transpose());
  }
  // Escalate jitter until the factorization succeeds.
  double jitter = options_.noise;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix Kj = K;
    Kj.diagonal().array() += jitter;
    chol_.compute(Kj);
    if (chol_.info() == Eigen::Success) {
      alpha_ = chol_.solve(standardized_);
      return true;
    }
    jitter = std::max(jitter * 10.0, 1e-10);
  }
  return false;
}

void GaussianProcess::fit(const Matrix& points, const Vector& values, std::uint64_t seed,
                          std::optional<Matern52> kernel) {
  require(points.rows() == values.size(), "gp: point and value counts differ");
  require(points.rows() >= 1, "gp: needs at least one observation");
  points_ = points;
  y_mean_ = values.mean();
  const double var = (values.array() - y_mean_).square().mean();
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  standardized_ = (values.array() - y_mean_) / y_scale_;

  const auto d = points.cols();
  if (kernel) {
    kernel_ = *kernel;
  } else {
    kernel_.length_scales = Vector::Constant(d, 0.3);
    kernel_.signal_variance = 1.0;
    if (options_.fit_kernel && points.rows() >= 2) {
      const double lo_l = std::log(options_.min_length_scale), hi_l = std::log(options_.max_length_scale);
      const double lo_s = std::log(options_.min_signal_variance), hi_s = std::log(options_.max_signal_variance);
      auto unpack = [&](const Vector& theta) {
        Matern52 k;
        k.length_scales = theta.head(d).array().max(lo_l).min(hi_l).exp().matrix();
        k.signal_variance = std::exp(std::clamp(theta(d), lo_s, hi_s));
        return k;
      };
      auto objective = [&](const Vector& theta) {
        const double ll = evaluate_log_likelihood(unpack(theta));
        return std::isfinite(ll) ? -ll : 1e300;
      };
      Rng rng(seed);
      Vector start(d + 1);
      start.head(d).setConstant(std::log(0.3));
      start(d) = 0.0;
      Vector best_theta = start;
      double best_value = objective(start);
      for (int r = 0; r <= options_.n_restarts; ++r) {
        if (r > 0) {
          for (Eigen::Index i = 0; i < d; ++i) start(i) = rng.uniform(lo_l, hi_l);
          start(d) = rng.uniform(-1.0, 1.0);
        }
        const Vector theta = nelder_mead(objective, start, 0.5, 200);
        const double v = objective(theta);
        if (v < best_value) {
          best_value = v;
          best_theta = theta;
        }
      }
      kernel_ = unpack(best_theta);
    }
  }
  if (!factorize(kernel_)) fail(ErrorCode::numeric, "gp: covariance matrix is not positive definite");
  log_likelihood_ = evaluate_log_likelihood(kernel_);
}

GpPrediction GaussianProcess::predict(const Eigen::Ref<const Vector>& x) const {
  const auto n = points_.rows();
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel_(points_.row(i).transpose(), x);
  const double mean = k.dot(alpha_);
  const Vector v = chol_.matrixL().solve(k);
  const double var = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * y_scale_ * var};
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double improvement = mean - best;
  if (sigma < 1e-12) return std::max(improvement, 0.0);
  const double z = improvement / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return improvement * cdf + sigma * pdf;
}

}  // namespace secret
