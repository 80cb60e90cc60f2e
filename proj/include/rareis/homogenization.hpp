#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rareis/landscapes.hpp"
#include "rareis/subsolutions.hpp"

namespace rareis {

using ScalarFn = std::function<double(double)>;

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
double simpson(const ScalarFn& f, double a, double b, std::size_t n);

/// (1/ell) int_0^ell f, refined by node doubling from 2^14 intervals until two
/// successive values agree to `rel_tol`. Throws QuadratureNotConverged.
double period_average(const ScalarFn& f, double ell, double rel_tol = 1e-10);

struct GibbsNormalizers {
  double L_norm;  ///< int_0^ell e^{-Q/D}
  double K;       ///< (1/ell) int e^{-Q/D}
  double K_hat;   ///< (1/ell) int e^{+Q/D}
};

GibbsNormalizers gibbs_normalizers(const ScalarFn& Q, double D, double ell);

/// 1 + chi'(y) = e^{Q(y)/D} / K_hat, the derivative of the periodic corrector
/// shifted by one.
ScalarFn cell_weight(const ScalarFn& Q, double D, double K_hat);
ScalarFn cell_weight(const ScalarFn& Q, double D, double ell, GibbsNormalizers* out);

/// Homogenized description of a periodic rough landscape.
struct EffectiveModel {
  ScalarFn r;             ///< -V'(x) / (K K_hat)
  double q;               ///< 2D / (K K_hat)
  double q_from_weight;   ///< 2D * int weight^2 dmu, computed by quadrature
  double mean_weight;     ///< int weight dmu = 1 / (K K_hat)
  double mean_weight_sq;  ///< int weight^2 dmu
  ScalarFn weight;
  double K;
  double K_hat;
  double ell;
  double D;

  /// r(x) = -rate * V'(x).
  double rate_factor() const { return 1.0 / (K * K_hat); }
};

/// Throws InvalidConfig unless the landscape is periodic_rough; a smooth
/// landscape is accepted and yields the trivial model (weight 1, q = 2D).
EffectiveModel effective_coefficients(const Landscape& landscape);

/// (r, q) of the homogenized Hamiltonian, for check_subsolution.
HamiltonianCoefficients homogenized_coefficients(const EffectiveModel& model);

/// Solves a periodic tridiagonal system
///   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]  (indices mod n)
/// by Sherman-Morrison on the Thomas algorithm. Throws SingularSystem on a
/// vanishing pivot.
std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs);

/// Centered finite-difference solve on a uniform periodic grid of
///   rho chi - [ -Q'(y) chi' + D chi'' ] = b.
/// `dQ` holds Q' at the grid nodes. The result satisfies the discrete system
/// to a relative residual of 1e-8 (else SingularSystem).
std::vector<double> solve_regularized_cell_problem(std::span<const double> b,
                                                   std::span<const double> dQ, double D,
                                                   double rho, double spacing);

/// Centered periodic difference of grid values.
std::vector<double> periodic_derivative(std::span<const double> values, double spacing);

}  // namespace rareis
