#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "rareis/errors.hpp"
#include "rareis/random_env.hpp"
#include "rareis/rng.hpp"

using namespace rareis;

namespace {

double lag_product_mean(const EnvironmentRealization& env, std::size_t lag) {
  double s = 0.0;
  const std::size_t n = env.values.size() - lag;
  for (std::size_t i = 0; i < n; ++i) s += env.values[i] * env.values[i + lag];
  return s / static_cast<double>(n);
}

double window_average(const EnvironmentRealization& env, double sign) {
  double s = 0.0;
  for (double v : env.values) s += std::exp(sign * v);
  return s / static_cast<double>(env.values.size());
}

}  // namespace

TEST_CASE("zero covariance gives a zero field") {
  const auto env = sample_field(squared_exponential(0.0), 50.0, 0.02, 3);
  for (double v : env.values) CHECK(v == 0.0);
}

TEST_CASE("sampling is deterministic in env_seed") {
  const auto a = sample_field(squared_exponential(), 40.0, 0.02, 11);
  const auto b = sample_field(squared_exponential(), 40.0, 0.02, 11);
  const auto c = sample_field(squared_exponential(), 40.0, 0.02, 12);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.values.size() == 2001);
  CHECK(a.upper() == doctest::Approx(40.0));
}

TEST_CASE("empirical covariance at lag 1 over 200 realizations") {
  // 10^4 sites at spacing 0.02; lag 1.0 is 50 sites.
  const int reps = 200;
  std::vector<double> est(reps);
  for (int r = 0; r < reps; ++r) {
    const auto env = sample_field(squared_exponential(), 199.98, 0.02, 1000 + r);
    REQUIRE(env.values.size() == 10000);
    est[r] = lag_product_mean(env, 50);
  }
  double m = 0, s2 = 0;
  for (double e : est) m += e;
  m /= reps;
  for (double e : est) s2 += (e - m) * (e - m);
  const double se = std::sqrt(s2 / (reps - 1) / reps);
  CHECK(std::abs(m - std::exp(-1.0)) < 3.0 * se);
}

TEST_CASE("one long realization: mean, variance and stationarity") {
  const auto env = sample_field(squared_exponential(), 2000.0, 0.02, 5);
  const double n_eff = 2000.0 / std::sqrt(std::numbers::pi);  // window / integral scale
  double mean = 0.0;
  for (double v : env.values) mean += v;
  mean /= static_cast<double>(env.values.size());
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n_eff));
  CHECK(lag_product_mean(env, 0) == doctest::Approx(1.0).epsilon(0.1));
  // Lags 0.5 and 2 (25 and 100 sites).
  CHECK(lag_product_mean(env, 25) == doctest::Approx(std::exp(-0.25)).epsilon(0.1));
  CHECK(std::abs(lag_product_mean(env, 100) - std::exp(-4.0)) < 0.05);
}

TEST_CASE("lognormal constants") {
  const auto k1 = lognormal_constants(1.0);
  CHECK(k1.K * k1.K_hat == doctest::Approx(std::exp(1.0)));
  CHECK(2.0 / (k1.K * k1.K_hat) == doctest::Approx(2.0 / std::exp(1.0)));
  const auto k0 = lognormal_constants(0.0);
  CHECK(k0.K == 1.0);
  CHECK(k0.K_hat == 1.0);
  CHECK_THROWS_AS(lognormal_constants(-1.0), InvalidConfig);
}

TEST_CASE("window averages of exp(+-Q) concentrate around e^{1/2}") {
  auto stats = [](double window, double sign) {
    std::vector<double> avg;
    for (int s = 0; s < 20; ++s)
      avg.push_back(window_average(sample_field(squared_exponential(), window, 0.02, 77 + s), sign));
    double m = 0, v = 0;
    for (double a : avg) m += a;
    m /= avg.size();
    for (double a : avg) v += (a - m) * (a - m);
    return std::pair{m, std::sqrt(v / (avg.size() - 1)) / m};
  };
  const auto [m_plus, cv_500] = stats(500.0, 1.0);
  const auto [m_minus, cv_minus] = stats(500.0, -1.0);
  CHECK(m_plus == doctest::Approx(std::exp(0.5)).epsilon(0.05));
  CHECK(m_minus == doctest::Approx(std::exp(0.5)).epsilon(0.05));
  const auto [m_small, cv_50] = stats(50.0, 1.0);
  CHECK(cv_500 < cv_50);
  (void)cv_minus;
  (void)m_small;
}

TEST_CASE("interpolant is exact at nodes and C1") {
  const auto env = sample_field(squared_exponential(), 20.0, 0.05, 9, -3.0);
  CHECK(env.lower() == -3.0);
  for (std::size_t i = 0; i < env.values.size(); i += 37) {
    const double y = env.origin + env.spacing * static_cast<double>(i);
    CHECK(env.value(y) == doctest::Approx(env.values[i]).epsilon(1e-12));
  }
  for (std::size_t i = 5; i < env.values.size() - 5; i += 53) {
    const double y = env.origin + env.spacing * static_cast<double>(i);
    const double h = 1e-7;
    CHECK(env.derivative(y - h) == doctest::Approx(env.derivative(y + h)).epsilon(1e-5));
    const double y2 = y + 0.3 * env.spacing;
    const double fd = (env.value(y2 + 1e-6) - env.value(y2 - 1e-6)) / 2e-6;
    CHECK(env.derivative(y2) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(env.value(-3.5), OutOfWindow);
  CHECK_THROWS_AS(env.derivative(17.5), OutOfWindow);
}

TEST_CASE("quenched weight") {
  auto zero = std::make_shared<const EnvironmentRealization>(
      sample_field(squared_exponential(0.0), 100.0, 0.02, 1));
  const auto w0 = quenched_weight(zero, 1.0);
  CHECK(w0(12.3) == 1.0);

  auto env = std::make_shared<const EnvironmentRealization>(
      sample_field(squared_exponential(), 1000.0, 0.02, 4));
  const double K_hat = lognormal_constants(1.0).K_hat;
  const auto w = quenched_weight(env, K_hat);
  RngStream rng(1, 0);
  bool positive = true;
  for (int i = 0; i < 100000; ++i) positive = positive && w(1000.0 * rng.uniform()) > 0.0;
  CHECK(positive);
  CHECK_THROWS_AS(w(1000.5), OutOfWindow);
  CHECK_THROWS_AS(quenched_weight(env, 0.0), InvalidConfig);
}

TEST_CASE("window average of the weight is near one across environments") {
  const double K_hat = lognormal_constants(1.0).K_hat;
  double m = 0.0;
  for (int s = 0; s < 20; ++s) {
    auto env = std::make_shared<const EnvironmentRealization>(
        sample_field(squared_exponential(), 500.0, 0.02, 300 + s));
    m += window_average(*env, 1.0) / K_hat;
  }
  CHECK(m / 20.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("random environment control") {
  auto zero = std::make_shared<const EnvironmentRealization>(
      sample_field(squared_exponential(0.0), 100.0, 0.02, 1));
  const Subsolution U([](double, double x) { return ValueGrad{0.0, -x}; }, "u");
  const auto u = random_env_control(U, zero, 1.0, 1.0, 0.1);
  CHECK(u(0.0, 0.4) == doctest::Approx(std::sqrt(2.0) * 0.4));
  const Subsolution flat([](double, double) { return ValueGrad{1.0, 0.0}; }, "flat");
  auto env = std::make_shared<const EnvironmentRealization>(
      sample_field(squared_exponential(), 100.0, 0.02, 2));
  CHECK(random_env_control(flat, env, std::exp(0.5), 1.0, 0.1)(0.0, 0.5) == 0.0);
}

TEST_CASE("field potential and embedding failure") {
  auto env = std::make_shared<const EnvironmentRealization>(
      sample_field(squared_exponential(), 30.0, 0.02, 2));
  const FieldPotential pot(env);
  CHECK(pot.period() == 0.0);
  CHECK(pot.value(10.0) == env->value(10.0));
  const Landscape land = quadratic_well(1.0).with_rough(std::make_shared<FieldPotential>(env), "f");
  CHECK(land.kind() == LandscapeKind::random_rough);
  // A box covariance is not positive definite.
  const Covariance box = [](double s) { return std::abs(s) < 1.0 ? 1.0 : 0.0; };
  CHECK_THROWS_AS(sample_field(box, 50.0, 0.02, 1), EmbeddingFailure);
}
