#include <doctest.h>

#include <cmath>

#include "rareis/errors.hpp"
#include "rareis/subsolutions.hpp"

using namespace rareis;

namespace {

double fd_grad(const Subsolution& s, double t, double x, double h = 1e-6) {
  return (s.value(t, x + h) - s.value(t, x - h)) / (2 * h);
}

}  // namespace

TEST_CASE("closed-form G values") {
  const Subsolution G = closed_form_G(1.0, 0.5, 1.0);
  // lambda x_hat^2 / (1 - e^{-2}) at the rest point.
  CHECK(G.value(0.0, 0.0) == doctest::Approx(1.1565176427496657).epsilon(1e-14));
  CHECK(G.value(0.3, 0.5) == doctest::Approx(0.7500154766434949).epsilon(1e-14));
  CHECK(G.grad_x(0.3, 0.5) == doctest::Approx(-0.9909352735649826).epsilon(1e-13));
  CHECK(G.grad_x(0.3, 0.5) == doctest::Approx(fd_grad(G, 0.3, 0.5)).epsilon(1e-7));
  // Ties at the rest point go to the +x_hat branch.
  CHECK(G.grad_x(0.0, 0.0) < 0.0);
  CHECK_THROWS_AS(G.value(1.0, 0.0), SingularAtTerminal);
  CHECK(G.label() == "exactG");
}

TEST_CASE("one-sided geometry") {
  const Subsolution right = closed_form_G(2.0, 0.25, 3.0, 1.0, {-1.0, false, true});
  const Subsolution both = closed_form_G(2.0, 0.25, 3.0, 1.0, {-1.0, true, true});
  CHECK(right.value(0.0, -1.2) >= both.value(0.0, -1.2));
  CHECK(right.value(0.0, -0.8) == doctest::Approx(both.value(0.0, -0.8)));
}

TEST_CASE("mollification parameters follow the table") {
  const auto p = make_mollification_params(0.1, 1.0, 0.5);
  CHECK(p.delta_moll == doctest::Approx(0.2));
  CHECK(p.L_hat == 0.5);
  CHECK(p.M == 4.0);  // 0.5 / 0.1^{1/2} < 4
  CHECK(p.t_star == doctest::Approx(2.0 * std::log(4.0)));
  const auto small = make_mollification_params(1e-4, 1.0, 0.5);
  CHECK(small.M == doctest::Approx(0.5 / std::pow(1e-4, 0.5)));
  const auto power = make_mollification_params(0.01, 1.0, 0.5, 0.25, -1.0, 0.1);
  CHECK(power.L_hat == doctest::Approx(std::pow(0.01, 0.2)));
  CHECK_THROWS_AS(make_mollification_params(0.1, 1.0, 0.5, 0.6), InvalidConfig);
  CHECK_THROWS_AS(make_mollification_params(0.1, 1.0, 0.5, 0.25, -1.0, 0.3), InvalidConfig);
}

TEST_CASE("mollified F and terminal-cost G") {
  const auto p = make_mollification_params(0.1, 1.0, 0.5);
  const Subsolution F = mollified_F(p, 1.0, 5.0);
  CHECK(F.value(1.0, 0.2) == doctest::Approx(0.7943629136161059).epsilon(1e-14));
  CHECK(F.grad_x(1.0, 0.2) == doctest::Approx(fd_grad(F, 1.0, 0.2)).epsilon(1e-7));
  // Finite at T thanks to 1/M.
  CHECK(std::isfinite(F.value(5.0, 0.0)));

  const Subsolution H = terminal_cost_G(0.5, 0.8, {-1.0, 1.0}, 1.0);
  CHECK(H.value(0.3, 0.2) == doctest::Approx(0.40875274995518573).epsilon(1e-14));
  for (double x : {-1.5, -0.3, 0.0, 0.7, 2.0}) {
    const double d = std::abs(x) - 1.0;
    CHECK(H.value(1.0, x) == doctest::Approx(d * d).epsilon(1e-14));
  }
}

TEST_CASE("exponential mollification") {
  const Subsolution a([](double, double x) { return ValueGrad{x, 1.0}; }, "a");
  const Subsolution b([](double, double) { return ValueGrad{1.0, 0.0}; }, "b");
  const Subsolution s = exponential_mollification({a, b}, 0.5);
  CHECK(s.value(0.0, 0.0) == doctest::Approx(-0.0634640055214863).epsilon(1e-14));
  CHECK(s.value(0.0, 0.0) <= 0.0);
  CHECK(s.grad_x(0.0, 0.3) == doctest::Approx(fd_grad(s, 0.0, 0.3)).epsilon(1e-7));
  const Subsolution single = exponential_mollification({a}, 0.5);
  CHECK(single.value(0.0, 0.3) == 0.3);
  // Far apart components reduce to the minimum.
  CHECK(s.value(0.0, -50.0) == doctest::Approx(-50.0));
}

TEST_CASE("quasipotential subsolution has zero residual") {
  for (const Landscape& land : {quadratic_well(1.0), double_well(), quadratic_well(2.5)}) {
    const Subsolution qp = quasipotential_subsolution(0.5, land, 0.0);
    CheckGrid grid;
    grid.x_lo = -2.0;
    grid.x_hi = 2.0;
    const auto report = check_subsolution(qp, gradient_coefficients(land), grid);
    CHECK(std::abs(report.min_residual) <= 1e-12);
  }
  const Landscape rough = one_well_rough();  // D = 1
  const Subsolution qp = quasipotential_subsolution(0.5, rough, 0.0);
  CHECK(qp.value(0.0, 1.0) == 0.0);
  const auto report = check_subsolution(qp, gradient_coefficients(rough), CheckGrid{});
  CHECK(std::abs(report.min_residual) <= 1e-12);
}

TEST_CASE("combined subsolution") {
  const Landscape land = quadratic_well(1.0);
  const double T = 5.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto p = make_mollification_params(eps, 1.0, 0.5);
    const Subsolution U = combined_subsolution(p, land, T);
    const Subsolution qp = quasipotential_subsolution(0.5, land);
    const double seam = T - p.t_star;
    CHECK(U.value(seam + 0.01, 0.3) == qp.value(0.0, 0.3));
    CHECK(U.value(seam, 0.3) <= qp.value(0.0, 0.3));
    CheckGrid grid;
    grid.t_hi = T;
    BoundaryConditions bc;
    bc.T = T;
    bc.target_points = {-1.0, 1.0};
    const auto report = check_subsolution(U, gradient_coefficients(land), grid, bc);
    CHECK(report.passed(1e-8));
  }
  const auto bad = make_mollification_params(0.1, 1.0, 0.5, 0.25, -1.0, 0.0, 2.0);
  CHECK_THROWS_AS(combined_subsolution(bad, land, T), InvalidConfig);
}

TEST_CASE("checker flags a supersolution") {
  const Landscape land = quadratic_well(1.0);
  const Subsolution steep([](double, double x) { return ValueGrad{3.0 * (0.5 - 0.5 * x * x), -3.0 * x}; },
                          "steep");
  const auto report = check_subsolution(steep, gradient_coefficients(land), CheckGrid{});
  CHECK(report.min_residual < -0.1);
  CHECK(std::abs(report.argmin_x) == doctest::Approx(1.0));
  BoundaryConditions bc;
  bc.target_points = {0.0};
  CHECK(check_subsolution(steep, gradient_coefficients(land), CheckGrid{}, bc).boundary_violations > 0);
}

TEST_CASE("controls") {
  const Subsolution U([](double t, double x) { return ValueGrad{0.0, x + t}; }, "lin");
  CHECK(gradient_control(U, 2.0)(0.5, 1.0) == doctest::Approx(-3.0));
  CHECK(capped_gradient_control(U, 1.0, 1.0, 0.25)(0.9, 0.0) == doctest::Approx(-0.75));
  CHECK(capped_gradient_control(U, 1.0, 1.0, 0.25)(0.5, 0.0) == doctest::Approx(-0.5));
  const auto w = weighted_control(U, 1.0, [](double y) { return y; }, 0.5);
  CHECK(w(0.0, 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("path cost and optimizer") {
  ActionFunctional free{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
  CHECK(path_cost(free, {0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}) == doctest::Approx(0.5));

  ActionFunctional ou{[](double x) { return -x; }, [](double) { return -1.0; }, 1.0};
  const OptimizedPath best = optimize_path_cost(ou, 0.0, 0.0, 1.0, {-1.0, 1.0}, 201);
  CHECK(best.cost == doctest::Approx(1.1565176427496657).epsilon(1e-3));
  for (std::size_t i = 1; i < best.cost_history.size(); ++i)
    CHECK(best.cost_history[i] <= best.cost_history[i - 1] + 1e-15);
  // The optimum reaches one of the endpoints and starts at the start.
  CHECK(std::abs(best.endpoint) == 1.0);
  CHECK(best.states.front() == 0.0);
}

TEST_CASE("one-sided quasipotential subsolution on the double well") {
  const Landscape land = double_well();
  const WellGeometry geo{-1.0, false, true};
  const Subsolution qp = quasipotential_subsolution(0.25, land, geo);
  // V(-2) - V(-1) = 9/4, half slope to the left of the rest point.
  CHECK(qp.value(0.0, -2.0) == doctest::Approx((0.25 - 9.0 / 8.0) / 0.5));
  CHECK(qp.grad_x(0.0, -2.0) == doctest::Approx(0.5 * 6.0 / 0.5));
  CHECK(qp.value(0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(qp.value(0.0, -1.0) == quasipotential_subsolution(0.25, land, -1.0).value(0.0, -1.0));
  CheckGrid grid;
  grid.x_lo = -2.0;
  grid.x_hi = 0.0;
  BoundaryConditions bc;
  bc.target_points = {0.0};
  const auto report = check_subsolution(qp, gradient_coefficients(land), grid, bc, 1e-12);
  CHECK(report.passed(1e-12));
  // Controlled drift -V' + sigma u vanishes left of the rest point.
  CHECK(-land.smooth().derivative(-1.7) - land.sigma() * land.sigma() * qp.grad_x(0.0, -1.7) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // F^M comes from the local quadratic model, so on the quartic the combined
  // function is only an approximate subsolution; the defect vanishes with eps.
  grid.t_hi = 5.0;
  double previous = -1.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto p = make_mollification_params(eps, 2.0, 0.25);
    const Subsolution U = combined_subsolution(p, land, 5.0, geo);
    const auto r = check_subsolution(U, gradient_coefficients(land), grid, bc);
    CHECK(r.boundary_violations == 0);
    CHECK(r.min_residual > previous);
    previous = r.min_residual;
  }
  CHECK(previous > -1e-3);
}
