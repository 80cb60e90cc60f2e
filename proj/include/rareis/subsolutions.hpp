#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rareis/landscapes.hpp"
#include "rareis/sde_engine.hpp"

namespace rareis {

struct ValueGrad {
  double value;
  double grad;
};

/// Scalar field U(t, x) with its x-gradient. The gradient defines the
/// importance-sampling control u = -sigma * U_x. Value object; cheap to copy
/// and safe to evaluate from many threads.
class Subsolution {
 public:
  using Eval = std::function<ValueGrad(double t, double x)>;

  Subsolution(Eval eval, std::string label);

  ValueGrad eval(double t, double x) const { return eval_(t, x); }
  double value(double t, double x) const { return eval_(t, x).value; }
  double grad_x(double t, double x) const { return eval_(t, x).grad; }
  const std::string& label() const { return label_; }

 private:
  Eval eval_;
  std::string label_;
};

/// Cost of steering dz = -a z dt + control from z to `target` within time
/// tau = T - t, for the action (1/2q) int |z' + a z|^2, with a quadratic
/// terminal penalty whose inverse weight is `inverse_penalty` (0 for a hard
/// target):
///   a (target - z e^{-a tau})^2 / (a * inverse_penalty + q (1 - e^{-2 a tau})).
struct ReachCost {
  double rate;             ///< a > 0
  double q;                ///< effective diffusivity
  double inverse_penalty;  ///< 0 for an exact endpoint constraint

  ValueGrad eval(double tau, double z, double target) const;
};

/// (delta_moll, L_hat, M, t_star) chosen from epsilon.
struct MollificationParams {
  double epsilon;
  double delta_moll;
  double L_hat;
  double M;
  double t_star;
  double kappa;
  double lambda;
  double L;
  double q = 1.0;  ///< diffusivity of the local quadratic model (Gamma^2)

  void validate() const;
};

/// Builds the parameter set delta = 2 eps, M = max(L_hat / eps^{2 kappa}, 4),
/// t* = (2 / lambda) log M. A negative `L_hat` selects L_hat = L; a positive
/// `m` overrides it with L_hat = eps^{2m} (requires m < kappa).
MollificationParams make_mollification_params(double epsilon, double lambda, double L,
                                              double kappa = 0.25, double L_hat = -1.0,
                                              double m = 0.0, double q = 1.0);

/// Location of the rest point and which sides of the well are targets.
struct WellGeometry {
  double rest_point = 0.0;
  bool left_target = true;
  bool right_target = true;
};

/// U_QP with only the target sides active. On a side without a target the
/// slope is halved, (L - [V(x) - V(rest)] / 2) / D: still C^1 and a strict
/// subsolution there, and the control no longer reverses the drift, which
/// for a superlinear V' sends paths off to infinity.
Subsolution quasipotential_subsolution(double L, const Landscape& landscape,
                                       const WellGeometry& geometry);

/// U_QP(x) = (L - [V(x) - V(rest)]) / D. For D = 1/2 this is 2L - W(O, x)
/// with the quasipotential W = 2V.
Subsolution quasipotential_subsolution(double L, const Landscape& landscape,
                                       double rest_point = 0.0);

/// Exact exit-problem value for V = lambda x^2 / 2:
///   G(t,x) = min_{x_hat = +-sqrt(2L/lambda)} lambda (x_hat - x e^{lambda(t-T)})^2
///            / (q (1 - e^{2 lambda (t-T)})).
/// Ties go to the +x_hat branch. Throws SingularAtTerminal for t >= T.
Subsolution closed_form_G(double lambda, double L, double T, double q = 1.0,
                          const WellGeometry& geometry = {});

/// F^M(t,x; x_hat) = lambda (x_hat - z e^{lambda(t-T)})^2
///                   / (q (1/M + 1 - e^{2 lambda (t-T)})), z = x - rest.
Subsolution mollified_F(const MollificationParams& params, double x_hat, double T,
                        double rest_point = 0.0);

/// Softmin -delta log sum exp(-U_i / delta) with the matching
/// softmin-weighted gradient.
Subsolution exponential_mollification(std::vector<Subsolution> components, double delta_moll);

/// Piecewise subsolution: U_QP for t > T - t*, and for t <= T - t* the
/// exponential mollification of U_QP and F^M(.; rest +- x_hat) + U_QP(rest +- x_hat).
Subsolution combined_subsolution(const MollificationParams& params, const Landscape& landscape,
                                 double T, const WellGeometry& geometry = {});

/// Value function for the terminal cost h(x) = min_s (x - s)^2 under the
/// linear model dz = -a z dt, diffusivity q:
///   min_s a (s - x e^{-a(T-t)})^2 / (a + q (1 - e^{-2a(T-t)})).
/// Finite up to and including t = T, where it equals h.
Subsolution terminal_cost_G(double rate, double q, std::vector<double> targets, double T);

/// u(t, x) = -sigma * U_x(t, x).
FeedbackControl gradient_control(const Subsolution& sub, double sigma);

/// Same as gradient_control but the gradient is evaluated at
/// min(t, T - cap); used for controls that blow up at the horizon.
FeedbackControl capped_gradient_control(const Subsolution& sub, double sigma, double T,
                                        double cap);

/// u(t, x) = -sigma * weight(x / delta) * U_x(t, x).
FeedbackControl weighted_control(const Subsolution& sub, double sigma,
                                 std::function<double(double)> weight, double delta);

// ---------------------------------------------------------------------------
// Verification

/// Coefficients (r, q) of the Hamiltonian H(x, p) = r(x) p - q p^2 / 2.
struct HamiltonianCoefficients {
  std::function<double(double)> drift;
  double q;
};

/// r = -V', q = 2D.
HamiltonianCoefficients gradient_coefficients(const Landscape& landscape);

struct CheckGrid {
  double t_lo = 0.0;
  double t_hi = 1.0;
  double x_lo = -1.0;
  double x_hi = 1.0;
  std::size_t nt = 41;
  std::size_t nx = 201;
  double time_step = 1e-5;  ///< central-difference step for dU/dt
  /// Points for which the residual is not evaluated (branch-switch tubes).
  std::function<bool(double t, double x)> exclude;
};

struct BoundaryConditions {
  /// Terminal cost h; checked as U(T, x) <= h(x) on the x-grid when set.
  std::function<double(double)> terminal_cost;
  double T = 0.0;
  /// Target-set points; checked as U(t, x) <= 0 along the t-grid.
  std::vector<double> target_points;
};

struct SubsolutionReport {
  double min_residual = 0.0;
  double argmin_t = 0.0;
  double argmin_x = 0.0;
  std::size_t points_checked = 0;
  std::size_t terminal_violations = 0;
  std::size_t boundary_violations = 0;
  double max_terminal_excess = 0.0;
  double max_boundary_excess = 0.0;

  bool passed(double tol) const {
    return min_residual >= -tol && terminal_violations == 0 && boundary_violations == 0;
  }
};

/// Grid check of dU/dt + r U_x - q U_x^2 / 2 >= 0 plus boundary and terminal
/// inequalities (violations counted beyond `tol`). dU/dt comes from central
/// differences, one-sided at the ends of [t_lo, t_hi].
SubsolutionReport check_subsolution(const Subsolution& sub, const HamiltonianCoefficients& coeffs,
                                    const CheckGrid& grid, const BoundaryConditions& bc = {},
                                    double tol = 1e-8);

// ---------------------------------------------------------------------------
// Action functional

/// (1/2) int (phi' - r(phi)) q_inv (phi' - r(phi)) dt.
struct ActionFunctional {
  std::function<double(double)> drift;
  std::function<double(double)> drift_derivative;  ///< optional; finite differences if empty
  double q_inv = 1.0;
};

/// Trapezoid quadrature of the action over a piecewise-linear path.
double path_cost(const ActionFunctional& action, const std::vector<double>& times,
                 const std::vector<double>& states);
double path_cost(const ActionFunctional& action, const Trajectory& path);

struct PathOptimizerOptions {
  std::size_t max_iterations = 200000;
  double gradient_tol = 1e-11;
};

struct OptimizedPath {
  std::vector<double> times;
  std::vector<double> states;
  double cost = 0.0;
  double endpoint = 0.0;
  std::size_t iterations = 0;
  std::vector<double> cost_history;
};

/// Minimizes the discretized action over paths on `n_knots` uniform knots
/// from (t_start, start) to (T, e) for each candidate endpoint e, keeping the
/// cheapest. Gradient descent preconditioned by the kinetic Hessian, with
/// Barzilai-Borwein steps guarded by an Armijo backtracking line search, so
/// the cost never increases.
OptimizedPath optimize_path_cost(const ActionFunctional& action, double start, double t_start,
                                 double T, const std::vector<double>& endpoints,
                                 std::size_t n_knots, const PathOptimizerOptions& options = {});

}  // namespace rareis
