#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rareis/landscapes.hpp"
#include "rareis/sde_engine.hpp"
#include "rareis/subsolutions.hpp"

namespace rareis {

using Covariance = std::function<double(double lag)>;

/// variance * exp(-(s / length)^2).
Covariance squared_exponential(double variance = 1.0, double length = 1.0);

/// One stationary Gaussian field sampled on a uniform grid
/// origin, origin + h, ..., origin + (n-1) h and interpolated by C^1 cubic
/// Hermite (Catmull-Rom) splines. Immutable once sampled.
struct EnvironmentRealization {
  double origin = 0.0;
  double spacing = 0.02;
  std::vector<double> values;
  std::vector<double> slopes;  ///< centered-difference node slopes for the interpolant
  Covariance covariance;
  std::uint64_t env_seed = 0;
  double min_eigenvalue = 0.0;  ///< most negative embedding eigenvalue before clipping

  double lower() const { return origin; }
  double upper() const { return origin + spacing * static_cast<double>(values.size() - 1); }
  double window() const { return upper() - lower(); }

  /// Interpolated Q(y); throws OutOfWindow outside [lower, upper].
  double value(double y) const;
  /// Derivative of the interpolant.
  double derivative(double y) const;
};

/// Exact-in-distribution sample on [origin, origin + window] by circulant
/// embedding. Embedding eigenvalues down to -1e-10 (relative to the largest)
/// are clipped to zero; anything more negative raises EmbeddingFailure.
EnvironmentRealization sample_field(const Covariance& covariance, double window, double spacing,
                                    std::uint64_t env_seed, double origin = 0.0);

struct LognormalConstants {
  double K;      ///< E[e^{-Q}]
  double K_hat;  ///< E[e^{Q}]
};

/// For Q ~ N(0, s^2): K = K_hat = e^{s^2/2}.
LognormalConstants lognormal_constants(double point_variance);

/// Rough potential backed by a sampled field.
class FieldPotential final : public RoughPotential {
 public:
  explicit FieldPotential(std::shared_ptr<const EnvironmentRealization> env);
  double value(double y) const override { return env_->value(y); }
  double derivative(double y) const override { return env_->derivative(y); }
  double period() const override { return 0.0; }
  std::string describe() const override;
  const EnvironmentRealization& realization() const { return *env_; }

 private:
  std::shared_ptr<const EnvironmentRealization> env_;
};

/// weight(y) = e^{Q(y)} / K_hat. Throws OutOfWindow outside the sampled window.
std::function<double(double)> quenched_weight(std::shared_ptr<const EnvironmentRealization> env,
                                              double K_hat);

/// u(t, x) = -sqrt(2D) * weight(x / delta) * U_x(t, x).
FeedbackControl random_env_control(const Subsolution& sub,
                                   std::shared_ptr<const EnvironmentRealization> env,
                                   double K_hat, double D, double delta);

}  // namespace rareis
