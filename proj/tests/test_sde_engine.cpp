#include <doctest.h>

#include <cmath>
#include <limits>

#include "rareis/errors.hpp"
#include "rareis/sde_engine.hpp"

using namespace rareis;

namespace {

SimulationConfig base_config() {
  SimulationConfig c;
  c.epsilon = 0.2;
  c.T = 1.0;
  c.dt = 1e-3;
  c.x0 = 0.5;
  c.n_paths = 1;
  return c;
}

}  // namespace

TEST_CASE("step count and truncated final step") {
  SimulationConfig c = base_config();
  c.dt = 0.3;
  CHECK(c.n_steps() == 4);
  RngStream s(1, 0);
  const Trajectory p = simulate_controlled_path(quadratic_well(1.0), {}, std::nullopt, c, s, {true});
  REQUIRE(p.times.size() == 5);
  CHECK(p.times.back() == 1.0);
  for (std::size_t i = 1; i < p.times.size(); ++i) CHECK(p.times[i] > p.times[i - 1]);
  CHECK(p.times[3] == doctest::Approx(0.9));
}

TEST_CASE("unrecorded paths keep the end points only") {
  SimulationConfig c = base_config();
  RngStream s(1, 0);
  const Trajectory p = simulate_controlled_path(quadratic_well(1.0), {}, std::nullopt, c, s);
  CHECK(p.times.size() == 2);
  CHECK(p.final_time() == 1.0);
  CHECK(!p.exit);
}

TEST_CASE("Euler moments of the quadratic well match the discrete recursion") {
  // X_{k+1} = (1 - lambda dt) X_k + sqrt(eps dt) Z_k: mean x0 a^n, var eps dt sum a^{2k}.
  const double lambda = 1.0;
  SimulationConfig c = base_config();
  const Landscape land = quadratic_well(lambda);
  const std::size_t n = c.n_steps();
  const double a = 1.0 - lambda * c.dt;
  const double mean = c.x0 * std::pow(a, static_cast<double>(n));
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k) var += c.epsilon * c.dt * std::pow(a, 2.0 * k);

  const int paths = 20000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < paths; ++i) {
    RngStream s = make_rng_stream(5, static_cast<std::uint64_t>(i));
    const double x = simulate_controlled_path(land, {}, std::nullopt, c, s).final_state();
    s1 += x;
    s2 += x * x;
  }
  const double m = s1 / paths;
  const double v = s2 / paths - m * m;
  CHECK(std::abs(m - mean) < 4.0 * std::sqrt(var / paths));
  CHECK(std::abs(v - var) < 4.0 * var * std::sqrt(2.0 / paths));
}

TEST_CASE("exit detection") {
  SimulationConfig c = base_config();
  c.x0 = 0.0;
  c.epsilon = 1.0;
  c.T = 50.0;
  RngStream s(3, 0);
  const Trajectory p =
      simulate_controlled_path(quadratic_well(1.0), {}, Interval{-0.2, 0.2}, c, s, {true});
  REQUIRE(p.exit);
  CHECK(p.exit->time == p.final_time());
  CHECK(p.exit->time < c.T);
  if (p.exit->side > 0) CHECK(p.final_state() >= 0.2);
  else CHECK(p.final_state() <= -0.2);
}

TEST_CASE("start outside the domain exits at t0") {
  SimulationConfig c = base_config();
  c.x0 = 2.0;
  RngStream s(3, 0);
  const Trajectory p =
      simulate_controlled_path(quadratic_well(1.0), {}, Interval{-1.0, 1.0}, c, s, {true});
  REQUIRE(p.exit);
  CHECK(p.exit->time == c.t0);
  CHECK(p.exit->side == 1);
  CHECK(p.times.size() == 1);
}

TEST_CASE("zero control reproduces the uncontrolled path") {
  SimulationConfig c = base_config();
  RngStream s1(8, 2), s2(8, 2);
  const Landscape land = quadratic_well(1.0);
  const Trajectory a = simulate_controlled_path(land, {}, std::nullopt, c, s1, {true});
  const Trajectory b =
      simulate_controlled_path(land, [](double, double) { return 0.0; }, std::nullopt, c, s2, {true});
  CHECK(a.states == b.states);
  CHECK(b.int_u_sq == 0.0);
  CHECK(b.int_u_dW == 0.0);
  CHECK(log_likelihood_ratio(b, c.epsilon) == 0.0);
}

TEST_CASE("constant control accumulators") {
  SimulationConfig c = base_config();
  c.dt = 0.3;
  RngStream s(8, 2);
  const Trajectory p = simulate_controlled_path(quadratic_well(1.0),
                                                [](double, double) { return 0.5; }, std::nullopt,
                                                c, s);
  CHECK(p.int_u_sq == doctest::Approx(0.25 * 1.0));
  CHECK(std::isfinite(p.int_u_dW));
}

TEST_CASE("configuration errors") {
  const Landscape land = quadratic_well(1.0);
  RngStream s(1, 0);
  SimulationConfig c = base_config();
  c.T = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = base_config();
  c.delta = 0.01;  // dt = 1e-3 > delta^2
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = base_config();
  c.n_paths = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = base_config();
  CHECK_THROWS_AS(simulate_controlled_path(land, {}, Interval{1.0, -1.0}, c, s), InvalidDomain);
  CHECK_THROWS_AS(simulate_controlled_path(one_well_rough(), {}, std::nullopt, c, s), InvalidConfig);
}

TEST_CASE("non-finite state aborts the path") {
  SimulationConfig c = base_config();
  RngStream s(1, 0);
  const auto blowup = [](double, double) { return std::numeric_limits<double>::max(); };
  CHECK_THROWS_AS(simulate_controlled_path(quadratic_well(1.0), blowup, std::nullopt, c, s),
                  NonFiniteState);
}

TEST_CASE("neighbouring streams are uncorrelated") {
  RngStream a = make_rng_stream(42, 0), b = make_rng_stream(42, 1);
  const int n = 10000;
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal(), y = b.normal();
    sab += x * y;
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("even rough landscape gives a centred terminal law") {
  // cos + sin is not even in y, so the symmetric case uses Q = cos.
  SimulationConfig c = base_config();
  c.epsilon = 0.25;
  c.delta = 0.1;
  c.x0 = 0.0;
  const Landscape land = one_well_rough().with_rough(
      std::make_shared<TrigPotential>(std::vector<double>{1.0}, std::vector<double>{0.0}),
      "even_rough");
  const int n = 10000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    RngStream s = make_rng_stream(17, static_cast<std::uint64_t>(i));
    const double x = simulate_controlled_path(land, {}, std::nullopt, c, s).final_state();
    s1 += x;
    s2 += x * x;
  }
  const double m = s1 / n;
  const double se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m) < 3.0 * se);
}

TEST_CASE("shrinking the domain can only shorten the exit time") {
  SimulationConfig c = base_config();
  c.x0 = 0.0;
  c.T = 5.0;
  const Landscape land = quadratic_well(1.0);
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream s1 = make_rng_stream(2, i), s2 = make_rng_stream(2, i);
    const Trajectory wide = simulate_controlled_path(land, {}, Interval{-0.6, 0.6}, c, s1);
    const Trajectory narrow = simulate_controlled_path(land, {}, Interval{-0.4, 0.5}, c, s2);
    const double tw = wide.exit ? wide.exit->time : c.T + 1.0;
    const double tn = narrow.exit ? narrow.exit->time : c.T + 1.0;
    CHECK(tn <= tw);
  }
}

TEST_CASE("step halving keeps the h = 0 functional at one") {
  // E[Z] = 1 at every dt; the halved run must agree within sampling error.
  const Landscape land = quadratic_well(1.0);
  const FeedbackControl u = [](double t, double x) { return 0.8 * std::sin(3.0 * t) - 0.5 * x; };
  for (double dt : {0.02, 0.01}) {
    SimulationConfig c = base_config();
    c.dt = dt;
    const int n = 20000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      RngStream s = make_rng_stream(31, static_cast<std::uint64_t>(i));
      const double z = std::exp(log_likelihood_ratio(
          simulate_controlled_path(land, u, std::nullopt, c, s), c.epsilon));
      s1 += z;
      s2 += z * z;
    }
    const double m = s1 / n;
    const double se = std::sqrt((s2 / n - m * m) / n);
    CHECK(std::abs(m - 1.0) < 4.0 * se);
  }
}
