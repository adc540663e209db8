#pragma once

#include "secret/common.hpp"

#include <optional>

namespace secret {

/// Matern 5/2 kernel with one length-scale per input dimension.
struct Matern52 {
  Vector length_scales;
  double signal_variance = 1.0;

  double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const;
};

struct GpOptions {
  /// Diagonal noise, in units of the standardized objective.
  double noise = 1e-6;
  bool fit_kernel = true;
  int n_restarts = 4;
  double min_length_scale = 1e-2;
  double max_length_scale = 1e1;
  double min_signal_variance = 1e-2;
  double max_signal_variance = 1e2;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regression on points in the unit cube. Targets are standardized
/// internally; predictions come back in the caller's units.
class GaussianProcess {
 public:
  explicit GaussianProcess(GpOptions options = {}) : options_(options) {}

  /// Fits the kernel by maximizing the log marginal likelihood (multi-start
  /// Nelder-Mead in log space) unless options.fit_kernel is false or a
  /// kernel is given.
  void fit(const Matrix& points, const Vector& values, std::uint64_t seed,
           std::optional<Matern52> kernel = std::nullopt);

  GpPrediction predict(const Eigen::Ref<const Vector>& x) const;
  double log_marginal_likelihood() const { return log_likelihood_; }
  const Matern52& kernel() const { return kernel_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }

  /// Log marginal likelihood of standardized targets under `kernel`; -inf when
  /// the covariance cannot be factorized.
  double evaluate_log_likelihood(const Matern52& kernel) const;

 private:
  bool factorize(const Matern52& kernel);

  GpOptions options_;
  Matrix points_;
  Vector standardized_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Matern52 kernel_;
  Eigen::LLT<Matrix> chol_;
  Vector alpha_;
  double log_likelihood_ = 0.0;
};

/// Expected improvement over `best` for maximization.
double expected_improvement(double mean, double variance, double best);

}  // namespace secret
