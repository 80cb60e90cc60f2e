#pragma once

#include <memory>
#include <string>
#include <vector>

namespace rareis {

/// Large-scale potential V with its analytic derivative.
class SmoothPotential {
 public:
  virtual ~SmoothPotential() = default;
  virtual double value(double x) const = 0;
  virtual double derivative(double x) const = 0;
  virtual std::string describe() const = 0;
};

/// Fast-scale potential Q(y), evaluated at y = x / delta.
class RoughPotential {
 public:
  virtual ~RoughPotential() = default;
  virtual double value(double y) const = 0;
  virtual double derivative(double y) const = 0;
  /// Period, or 0 for a non-periodic (random) field.
  virtual double period() const = 0;
  virtual std::string describe() const = 0;
};

/// V(x) = lambda x^2 / 2.
class QuadraticPotential final : public SmoothPotential {
 public:
  explicit QuadraticPotential(double lambda);
  double value(double x) const override { return 0.5 * lambda_ * x * x; }
  double derivative(double x) const override { return lambda_ * x; }
  std::string describe() const override;
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// V(x) = depth * (x^2 - a^2)^2 / a^4: wells at +-a, saddle at 0 with barrier
/// height `depth`. depth = 1/4, a = 1 gives (x^2 - 1)^2 / 4.
class DoubleWellPotential final : public SmoothPotential {
 public:
  DoubleWellPotential(double depth, double half_width);
  double value(double x) const override;
  double derivative(double x) const override;
  std::string describe() const override;
  double depth() const { return depth_; }
  double half_width() const { return a_; }
  /// V''(+-a).
  double well_curvature() const;

 private:
  double depth_;
  double a_;
};

/// Q(y) = sum_k a_k cos(k y) + b_k sin(k y), period 2 pi.
class TrigPotential final : public RoughPotential {
 public:
  TrigPotential(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);
  double value(double y) const override;
  double derivative(double y) const override;
  double period() const override;
  std::string describe() const override;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

enum class LandscapeKind { smooth, periodic_rough, random_rough };

const char* to_string(LandscapeKind kind);

/// Potential environment eps Q(x/delta) + V(x) with diffusivity D. Immutable
/// after construction and shared freely between threads.
class Landscape {
 public:
  Landscape(std::shared_ptr<const SmoothPotential> smooth,
            std::shared_ptr<const RoughPotential> rough, double diffusivity,
            std::string name);

  LandscapeKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double diffusivity() const { return diffusivity_; }
  /// Noise coefficient sqrt(2 D).
  double sigma() const { return sigma_; }
  bool has_rough_part() const { return rough_ != nullptr; }

  const SmoothPotential& smooth() const { return *smooth_; }
  const RoughPotential& rough() const { return *rough_; }
  std::shared_ptr<const SmoothPotential> smooth_ptr() const { return smooth_; }
  std::shared_ptr<const RoughPotential> rough_ptr() const { return rough_; }

  double V(double x) const { return smooth_->value(x); }
  double dV(double x) const { return smooth_->derivative(x); }
  double Q(double y) const { return rough_ ? rough_->value(y) : 0.0; }
  double dQ(double y) const { return rough_ ? rough_->derivative(y) : 0.0; }

  /// -(eps/delta) Q'(x/delta) - V'(x); the rough term is dropped when delta == 0.
  double drift(double x, double eps, double delta) const;

  /// Same landscape with the rough part replaced.
  Landscape with_rough(std::shared_ptr<const RoughPotential> rough, std::string name) const;

 private:
  std::shared_ptr<const SmoothPotential> smooth_;
  std::shared_ptr<const RoughPotential> rough_;
  double diffusivity_;
  double sigma_;
  LandscapeKind kind_;
  std::string name_;
};

/// Gradient diffusion dX = -V'dt + sqrt(eps) dW, i.e. D = 1/2.
Landscape quadratic_well(double lambda);

/// V = x^2/2, Q = cos y + sin y, D = 1.
Landscape one_well_rough();

/// V = depth (x^2 - a^2)^2 / a^4 with D = 1/2. Defaults give (x^2-1)^2/4.
Landscape double_well(double depth = 0.25, double half_width = 1.0);

/// Preset lookup by CLI name: "quadratic", "one_well_rough", "double_well".
Landscape landscape_by_name(const std::string& name);

}  // namespace rareis
