#include "rareis/subsolutions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "rareis/errors.hpp"

namespace rareis {

Subsolution::Subsolution(Eval eval, std::string label)
    : eval_(std::move(eval)), label_(std::move(label)) {}

ValueGrad ReachCost::eval(double tau, double z, double target) const {
  const double e = std::exp(-rate * tau);
  const double m = target - z * e;
  const double den = rate * inverse_penalty - q * std::expm1(-2.0 * rate * tau);
  if (!(den > 0.0)) throw SingularAtTerminal("reach cost is singular at the terminal time");
  return {rate * m * m / den, -2.0 * rate * m * e / den};
}

void MollificationParams::validate() const {
  if (!(epsilon > 0.0) || !(lambda > 0.0) || !(L > 0.0) || !(q > 0.0))
    throw InvalidConfig("mollification parameters need positive epsilon, lambda, L and q");
  if (!(kappa > 0.0 && kappa < 0.5)) throw InvalidConfig("kappa must lie in (0, 1/2)");
  if (!(L_hat > 0.0 && L_hat <= L)) throw InvalidConfig("L_hat must lie in (0, L]");
  if (!(M >= 4.0)) throw InvalidConfig("M must be at least 4");
}

MollificationParams make_mollification_params(double epsilon, double lambda, double L,
                                              double kappa, double L_hat, double m, double q) {
  MollificationParams p;
  p.epsilon = epsilon;
  p.lambda = lambda;
  p.L = L;
  p.kappa = kappa;
  p.q = q;
  if (m > 0.0) {
    if (!(m < kappa)) throw InvalidConfig("L_hat = eps^{2m} requires m < kappa");
    p.L_hat = std::min(std::pow(epsilon, 2.0 * m), L);
  } else {
    p.L_hat = L_hat > 0.0 ? L_hat : L;
  }
  p.delta_moll = 2.0 * epsilon;
  p.M = std::max(p.L_hat / std::pow(epsilon, 2.0 * kappa), 4.0);
  p.t_star = (2.0 / lambda) * std::log(p.M);
  p.validate();
  return p;
}

Subsolution quasipotential_subsolution(double L, const Landscape& landscape, double rest_point) {
  auto smooth = landscape.smooth_ptr();
  const double D = landscape.diffusivity();
  const double v_rest = smooth->value(rest_point);
  return Subsolution(
      [smooth, D, L, v_rest](double, double x) -> ValueGrad {
        return {(L - (smooth->value(x) - v_rest)) / D, -smooth->derivative(x) / D};
      },
      "qp");
}

Subsolution quasipotential_subsolution(double L, const Landscape& landscape,
                                       const WellGeometry& geometry) {
  if (!geometry.left_target && !geometry.right_target)
    throw InvalidConfig("quasipotential subsolution needs at least one target side");
  const Subsolution full = quasipotential_subsolution(L, landscape, geometry.rest_point);
  if (geometry.left_target && geometry.right_target) return full;
  const double rest = geometry.rest_point;
  const double top = L / landscape.diffusivity();
  const bool right = geometry.right_target;
  // Half slope: residual r^2 / (2q) > 0 and zero controlled drift on that side.
  return Subsolution(
      [full, rest, top, right](double t, double x) -> ValueGrad {
        if (right ? x >= rest : x <= rest) return full.eval(t, x);
        const ValueGrad v = full.eval(t, x);
        return {0.5 * (v.value + top), 0.5 * v.grad};
      },
      "qp");
}

Subsolution closed_form_G(double lambda, double L, double T, double q,
                          const WellGeometry& geometry) {
  if (!(lambda > 0.0) || !(L > 0.0)) throw InvalidConfig("closed_form_G needs lambda, L > 0");
  if (!geometry.left_target && !geometry.right_target)
    throw InvalidConfig("closed_form_G needs at least one target side");
  const ReachCost cost{lambda, q, 0.0};
  const double x_hat = std::sqrt(2.0 * L / lambda);
  return Subsolution(
      [=](double t, double x) -> ValueGrad {
        if (!(t < T)) throw SingularAtTerminal("closed-form G is singular at t >= T");
        const double z = x - geometry.rest_point;
        const double tau = T - t;
        ValueGrad best{std::numeric_limits<double>::infinity(), 0.0};
        if (geometry.right_target) best = cost.eval(tau, z, x_hat);
        if (geometry.left_target) {
          const ValueGrad left = cost.eval(tau, z, -x_hat);
          if (left.value < best.value) best = left;
        }
        return best;
      },
      "exactG");
}

Subsolution mollified_F(const MollificationParams& params, double x_hat, double T,
                        double rest_point) {
  const ReachCost cost{params.lambda, params.q, params.q / (params.lambda * params.M)};
  return Subsolution(
      [=](double t, double x) { return cost.eval(T - t, x - rest_point, x_hat); }, "FM");
}

Subsolution exponential_mollification(std::vector<Subsolution> components, double delta_moll) {
  if (components.empty()) throw InvalidConfig("exponential mollification needs components");
  if (!(delta_moll > 0.0)) throw InvalidConfig("mollification delta must be positive");
  auto parts = std::make_shared<const std::vector<Subsolution>>(std::move(components));
  return Subsolution(
      [parts, delta_moll](double t, double x) -> ValueGrad {
        const std::size_t n = parts->size();
        if (n == 1) return (*parts)[0].eval(t, x);
        std::array<ValueGrad, 8> stack_buf;
        std::vector<ValueGrad> heap_buf;
        ValueGrad* vg = stack_buf.data();
        if (n > stack_buf.size()) {
          heap_buf.resize(n);
          vg = heap_buf.data();
        }
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          vg[i] = (*parts)[i].eval(t, x);
          lo = std::min(lo, vg[i].value);
        }
        double z = 0.0;
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double w = std::exp(-(vg[i].value - lo) / delta_moll);
          z += w;
          g += w * vg[i].grad;
        }
        return {lo - delta_moll * std::log(z), g / z};
      },
      "softmin");
}

Subsolution combined_subsolution(const MollificationParams& params, const Landscape& landscape,
                                 double T, const WellGeometry& geometry) {
  params.validate();
  const double q = 2.0 * landscape.diffusivity();
  if (std::abs(params.q - q) > 1e-12 * q)
    throw InvalidConfig("mollification q must equal 2D of the landscape");
  if (!geometry.left_target && !geometry.right_target)
    throw InvalidConfig("combined subsolution needs at least one target side");

  const Subsolution qp = quasipotential_subsolution(params.L, landscape, geometry);
  const double x_hat = std::sqrt(2.0 * params.L_hat / params.lambda);

  std::vector<Subsolution> parts{qp};
  auto add_side = [&](double side) {
    const double anchor = geometry.rest_point + side * x_hat;
    const double offset = qp.value(0.0, anchor);
    const Subsolution f = mollified_F(params, side * x_hat, T, geometry.rest_point);
    parts.emplace_back(
        [f, offset](double t, double x) -> ValueGrad {
          const ValueGrad v = f.eval(t, x);
          return {v.value + offset, v.grad};
        },
        "FM+offset");
  };
  if (geometry.right_target) add_side(1.0);
  if (geometry.left_target) add_side(-1.0);

  const Subsolution soft = exponential_mollification(std::move(parts), params.delta_moll);
  const double seam = T - params.t_star;
  return Subsolution(
      [qp, soft, seam](double t, double x) { return t > seam ? qp.eval(t, x) : soft.eval(t, x); },
      "combined");
}

Subsolution terminal_cost_G(double rate, double q, std::vector<double> targets, double T) {
  if (targets.empty()) throw InvalidConfig("terminal_cost_G needs targets");
  if (!(rate > 0.0) || !(q > 0.0)) throw InvalidConfig("terminal_cost_G needs rate, q > 0");
  const ReachCost cost{rate, q, 1.0};
  return Subsolution(
      [cost, targets = std::move(targets), T](double t, double x) -> ValueGrad {
        ValueGrad best{std::numeric_limits<double>::infinity(), 0.0};
        for (double s : targets) {
          const ValueGrad v = cost.eval(T - t, x, s);
          if (v.value < best.value) best = v;
        }
        return best;
      },
      "terminalG");
}

FeedbackControl gradient_control(const Subsolution& sub, double sigma) {
  return [sub, sigma](double t, double x) { return -sigma * sub.grad_x(t, x); };
}

FeedbackControl capped_gradient_control(const Subsolution& sub, double sigma, double T,
                                        double cap) {
  const double t_cap = T - cap;
  return [sub, sigma, t_cap](double t, double x) {
    return -sigma * sub.grad_x(std::min(t, t_cap), x);
  };
}

FeedbackControl weighted_control(const Subsolution& sub, double sigma,
                                 std::function<double(double)> weight, double delta) {
  return [sub, sigma, weight = std::move(weight), delta](double t, double x) {
    return -sigma * weight(x / delta) * sub.grad_x(t, x);
  };
}

HamiltonianCoefficients gradient_coefficients(const Landscape& landscape) {
  auto smooth = landscape.smooth_ptr();
  return {[smooth](double x) { return -smooth->derivative(x); }, 2.0 * landscape.diffusivity()};
}

namespace {

double time_derivative(const Subsolution& sub, double t, double x, double h, double lo,
                       double hi) {
  if (t - h >= lo && t + h <= hi) return (sub.value(t + h, x) - sub.value(t - h, x)) / (2.0 * h);
  // Written in differences so a time-independent U gives exactly zero.
  if (t + 2.0 * h <= hi) {
    const double u0 = sub.value(t, x);
    return (4.0 * (sub.value(t + h, x) - u0) - (sub.value(t + 2.0 * h, x) - u0)) / (2.0 * h);
  }
  if (t - 2.0 * h >= lo) {
    const double u0 = sub.value(t, x);
    return (4.0 * (u0 - sub.value(t - h, x)) - (u0 - sub.value(t - 2.0 * h, x))) / (2.0 * h);
  }
  // Degenerate time window: treat as stationary probe.
  return (sub.value(t + h, x) - sub.value(t - h, x)) / (2.0 * h);
}

double grid_point(double lo, double hi, std::size_t i, std::size_t n) {
  if (n <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

SubsolutionReport check_subsolution(const Subsolution& sub, const HamiltonianCoefficients& coeffs,
                                    const CheckGrid& grid, const BoundaryConditions& bc,
                                    double tol) {
  SubsolutionReport report;
  report.min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.nt; ++i) {
    const double t = grid_point(grid.t_lo, grid.t_hi, i, grid.nt);
    for (std::size_t j = 0; j < grid.nx; ++j) {
      const double x = grid_point(grid.x_lo, grid.x_hi, j, grid.nx);
      if (grid.exclude && grid.exclude(t, x)) continue;
      const double ut = time_derivative(sub, t, x, grid.time_step, grid.t_lo, grid.t_hi);
      const double p = sub.grad_x(t, x);
      const double residual = ut + coeffs.drift(x) * p - 0.5 * coeffs.q * p * p;
      ++report.points_checked;
      if (residual < report.min_residual) {
        report.min_residual = residual;
        report.argmin_t = t;
        report.argmin_x = x;
      }
    }
  }
  if (report.points_checked == 0) report.min_residual = 0.0;

  if (bc.terminal_cost) {
    for (std::size_t j = 0; j < grid.nx; ++j) {
      const double x = grid_point(grid.x_lo, grid.x_hi, j, grid.nx);
      const double excess = sub.value(bc.T, x) - bc.terminal_cost(x);
      report.max_terminal_excess = std::max(report.max_terminal_excess, excess);
      if (excess > tol) ++report.terminal_violations;
    }
  }
  for (double target : bc.target_points) {
    for (std::size_t i = 0; i < grid.nt; ++i) {
      const double t = grid_point(grid.t_lo, grid.t_hi, i, grid.nt);
      const double excess = sub.value(t, target);
      report.max_boundary_excess = std::max(report.max_boundary_excess, excess);
      if (excess > tol) ++report.boundary_violations;
    }
  }
  return report;
}

double path_cost(const ActionFunctional& action, const std::vector<double>& times,
                 const std::vector<double>& states) {
  if (times.size() != states.size()) throw InvalidConfig("path times/states length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    if (!(h > 0.0)) throw InvalidConfig("path times must be strictly increasing");
    const double slope = (states[i + 1] - states[i]) / h;
    const double a = slope - action.drift(states[i]);
    const double b = slope - action.drift(states[i + 1]);
    total += 0.25 * h * action.q_inv * (a * a + b * b);
  }
  return total;
}

double path_cost(const ActionFunctional& action, const Trajectory& path) {
  return path_cost(action, path.times, path.states);
}

namespace {

struct KnotProblem {
  const ActionFunctional& action;
  double h;
  double start;
  double end;
  std::size_t n;  // total knots

  double drift_derivative(double x) const {
    if (action.drift_derivative) return action.drift_derivative(x);
    const double e = 1e-6 * std::max(1.0, std::abs(x));
    return (action.drift(x + e) - action.drift(x - e)) / (2.0 * e);
  }

  double knot(const std::vector<double>& inner, std::size_t i) const {
    if (i == 0) return start;
    if (i == n - 1) return end;
    return inner[i - 1];
  }

  double cost(const std::vector<double>& inner) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double p0 = knot(inner, i);
      const double p1 = knot(inner, i + 1);
      const double s = (p1 - p0) / h;
      const double a = s - action.drift(p0);
      const double b = s - action.drift(p1);
      total += 0.25 * h * action.q_inv * (a * a + b * b);
    }
    return total;
  }

  void gradient(const std::vector<double>& inner, std::vector<double>& g) const {
    std::fill(g.begin(), g.end(), 0.0);
    const double c = 0.5 * h * action.q_inv;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double p0 = knot(inner, i);
      const double p1 = knot(inner, i + 1);
      const double s = (p1 - p0) / h;
      const double a = s - action.drift(p0);
      const double b = s - action.drift(p1);
      const double d0 = c * (a * (-1.0 / h - drift_derivative(p0)) + b * (-1.0 / h));
      const double d1 = c * (a * (1.0 / h) + b * (1.0 / h - drift_derivative(p1)));
      if (i >= 1) g[i - 1] += d0;
      if (i + 1 <= n - 2) g[i] += d1;
    }
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

OptimizedPath optimize_single(const ActionFunctional& action, double start, double t_start,
                              double T, double endpoint, std::size_t n_knots,
                              const PathOptimizerOptions& options) {
  OptimizedPath out;
  out.endpoint = endpoint;
  const double h = (T - t_start) / static_cast<double>(n_knots - 1);
  for (std::size_t i = 0; i < n_knots; ++i) out.times.push_back(t_start + h * static_cast<double>(i));

  KnotProblem prob{action, h, start, endpoint, n_knots};
  std::vector<double> x(n_knots - 2);
  for (std::size_t i = 1; i + 1 < n_knots; ++i)
    x[i - 1] = start + (endpoint - start) * static_cast<double>(i) / static_cast<double>(n_knots - 1);

  // Preconditioner: the kinetic part of the Hessian, (q_inv / h) tridiag(-1, 2, -1).
  const std::size_t m = x.size();
  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    std::vector<double> c(m);
    const double scale = h / action.q_inv;
    double beta = 2.0;
    z[0] = scale * r[0] / beta;
    for (std::size_t i = 1; i < m; ++i) {
      c[i] = -1.0 / beta;
      beta = 2.0 + c[i];
      z[i] = (scale * r[i] + z[i - 1]) / beta;
    }
    for (std::size_t i = m - 1; i-- > 0;) z[i] -= c[i + 1] * z[i + 1];
  };

  std::vector<double> g(m), g_new(m), x_new(m), d(m), d_new(m);
  double f = prob.cost(x);
  prob.gradient(x, g);
  precondition(g, d);
  out.cost_history.push_back(f);
  double alpha = 1.0;

  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    const double gmax = max_abs(g);
    if (gmax < options.gradient_tol) break;
    double gd = 0.0;
    for (std::size_t i = 0; i < m; ++i) gd += g[i] * d[i];

    double step = alpha;
    double f_new = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < m; ++i) x_new[i] = x[i] - step * d[i];
      f_new = prob.cost(x_new);
      if (f_new <= f - 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No further decrease is representable; accept the point if it is stationary enough.
      if (gmax < 1e-7) break;
      throw NoConvergence("path optimizer line search failed");
    }
    prob.gradient(x_new, g_new);
    precondition(g_new, d_new);
    double sy = 0.0, yz = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = x_new[i] - x[i];
      const double y = g_new[i] - g[i];
      sy += s * y;
      yz += y * (d_new[i] - d[i]);
    }
    alpha = sy > 0.0 && yz > 0.0 ? std::clamp(sy / yz, 1e-6, 1e6) : 1.0;
    x.swap(x_new);
    g.swap(g_new);
    d.swap(d_new);
    f = f_new;
    out.cost_history.push_back(f);
  }
  if (it == options.max_iterations) {
    std::ostringstream os;
    os << "path optimizer did not converge in " << options.max_iterations << " iterations";
    throw NoConvergence(os.str());
  }
  out.iterations = it;
  out.cost = f;
  out.states.resize(n_knots);
  for (std::size_t i = 0; i < n_knots; ++i) out.states[i] = prob.knot(x, i);
  return out;
}

}  // namespace

OptimizedPath optimize_path_cost(const ActionFunctional& action, double start, double t_start,
                                 double T, const std::vector<double>& endpoints,
                                 std::size_t n_knots, const PathOptimizerOptions& options) {
  if (n_knots < 8) throw InvalidConfig("optimize_path_cost needs at least 8 knots");
  if (!(T > t_start)) throw InvalidConfig("optimize_path_cost needs T > t_start");
  if (endpoints.empty()) throw InvalidConfig("optimize_path_cost needs endpoint candidates");

  for (double e : endpoints) {
    if (std::abs(start - e) <= 1e-12) {
      OptimizedPath trivial;
      trivial.times = {t_start};
      trivial.states = {start};
      trivial.endpoint = e;
      trivial.cost_history = {0.0};
      return trivial;
    }
  }
  OptimizedPath best;
  best.cost = std::numeric_limits<double>::infinity();
  for (double e : endpoints) {
    OptimizedPath candidate = optimize_single(action, start, t_start, T, e, n_knots, options);
    if (candidate.cost < best.cost) best = std::move(candidate);
  }
  return best;
}

}  // namespace rareis
