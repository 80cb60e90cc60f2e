#include "rareis/landscapes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rareis/errors.hpp"

namespace rareis {

QuadraticPotential::QuadraticPotential(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw InvalidConfig("quadratic well requires lambda > 0");
}

std::string QuadraticPotential::describe() const {
  std::ostringstream os;
  os << "V(x)=" << lambda_ << "*x^2/2";
  return os.str();
}

DoubleWellPotential::DoubleWellPotential(double depth, double half_width)
    : depth_(depth), a_(half_width) {
  if (!(depth > 0.0) || !(half_width > 0.0))
    throw InvalidConfig("double well requires positive depth and half width");
}

double DoubleWellPotential::value(double x) const {
  const double s = x * x - a_ * a_;
  return depth_ * s * s / (a_ * a_ * a_ * a_);
}

double DoubleWellPotential::derivative(double x) const {
  return 4.0 * depth_ * x * (x * x - a_ * a_) / (a_ * a_ * a_ * a_);
}

double DoubleWellPotential::well_curvature() const {
  // V'' = 4 depth (3x^2 - a^2) / a^4, evaluated at x = a.
  return 8.0 * depth_ / (a_ * a_);
}

std::string DoubleWellPotential::describe() const {
  std::ostringstream os;
  os << "V(x)=" << depth_ << "*(x^2-" << a_ * a_ << ")^2/" << a_ * a_ * a_ * a_;
  return os.str();
}

TrigPotential::TrigPotential(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
  a_.resize(std::max(a_.size(), b_.size()), 0.0);
  b_.resize(a_.size(), 0.0);
}

double TrigPotential::value(double y) const {
  if (a_.size() == 1) return a_[0] * std::cos(y) + b_[0] * std::sin(y);
  double s = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double ky = static_cast<double>(k + 1) * y;
    s += a_[k] * std::cos(ky) + b_[k] * std::sin(ky);
  }
  return s;
}

double TrigPotential::derivative(double y) const {
  if (a_.size() == 1) return -a_[0] * std::sin(y) + b_[0] * std::cos(y);
  double s = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    s += kk * (-a_[k] * std::sin(kk * y) + b_[k] * std::cos(kk * y));
  }
  return s;
}

double TrigPotential::period() const { return 2.0 * std::numbers::pi; }

std::string TrigPotential::describe() const {
  std::ostringstream os;
  os << "Q(y)=";
  for (std::size_t k = 0; k < a_.size(); ++k) {
    if (k) os << "+";
    os << a_[k] << "*cos(" << k + 1 << "y)+" << b_[k] << "*sin(" << k + 1 << "y)";
  }
  return os.str();
}

const char* to_string(LandscapeKind kind) {
  switch (kind) {
    case LandscapeKind::smooth: return "smooth";
    case LandscapeKind::periodic_rough: return "periodic_rough";
    case LandscapeKind::random_rough: return "random_rough";
  }
  return "?";
}

Landscape::Landscape(std::shared_ptr<const SmoothPotential> smooth,
                     std::shared_ptr<const RoughPotential> rough, double diffusivity,
                     std::string name)
    : smooth_(std::move(smooth)),
      rough_(std::move(rough)),
      diffusivity_(diffusivity),
      sigma_(std::sqrt(2.0 * diffusivity)),
      name_(std::move(name)) {
  if (!smooth_) throw InvalidConfig("landscape needs a smooth part");
  if (!(diffusivity > 0.0)) throw InvalidConfig("landscape needs D > 0");
  if (!rough_)
    kind_ = LandscapeKind::smooth;
  else if (rough_->period() > 0.0)
    kind_ = LandscapeKind::periodic_rough;
  else
    kind_ = LandscapeKind::random_rough;
}

double Landscape::drift(double x, double eps, double delta) const {
  double d = -smooth_->derivative(x);
  if (rough_ && delta > 0.0) d -= (eps / delta) * rough_->derivative(x / delta);
  return d;
}

Landscape Landscape::with_rough(std::shared_ptr<const RoughPotential> rough,
                                std::string name) const {
  return Landscape(smooth_, std::move(rough), diffusivity_, std::move(name));
}

Landscape quadratic_well(double lambda) {
  return Landscape(std::make_shared<QuadraticPotential>(lambda), nullptr, 0.5, "quadratic");
}

Landscape one_well_rough() {
  return Landscape(std::make_shared<QuadraticPotential>(1.0),
                   std::make_shared<TrigPotential>(std::vector<double>{1.0},
                                                   std::vector<double>{1.0}),
                   1.0, "one_well_rough");
}

Landscape double_well(double depth, double half_width) {
  return Landscape(std::make_shared<DoubleWellPotential>(depth, half_width), nullptr, 0.5,
                   "double_well");
}

Landscape landscape_by_name(const std::string& name) {
  if (name == "quadratic") return quadratic_well(1.0);
  if (name == "one_well_rough") return one_well_rough();
  if (name == "double_well") return double_well();
  throw ConfigError("unknown landscape '" + name + "'");
}

}  // namespace rareis
