#include "rareis/homogenization.hpp"

#include <cmath>
#include <sstream>

#include "rareis/errors.hpp"

namespace rareis {

double simpson(const ScalarFn& f, double a, double b, std::size_t n) {
  if (n < 2 || n % 2 != 0) throw InvalidConfig("simpson needs an even number of intervals");
  const double h = (b - a) / static_cast<double>(n);
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    (i % 2 ? odd : even) += v;
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double period_average(const ScalarFn& f, double ell, double rel_tol) {
  std::size_t n = std::size_t{1} << 14;
  double prev = simpson(f, 0.0, ell, n) / ell;
  for (int level = 0; level < 8; ++level) {
    n *= 2;
    const double cur = simpson(f, 0.0, ell, n) / ell;
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  std::ostringstream os;
  os << "period average did not converge to " << rel_tol << " with " << n << " intervals";
  throw QuadratureNotConverged(os.str());
}

GibbsNormalizers gibbs_normalizers(const ScalarFn& Q, double D, double ell) {
  if (!(D > 0.0) || !(ell > 0.0)) throw InvalidConfig("gibbs_normalizers needs D, ell > 0");
  const double K = period_average([&](double y) { return std::exp(-Q(y) / D); }, ell);
  const double K_hat = period_average([&](double y) { return std::exp(Q(y) / D); }, ell);
  return {ell * K, K, K_hat};
}

ScalarFn cell_weight(const ScalarFn& Q, double D, double K_hat) {
  return [Q, D, K_hat](double y) { return std::exp(Q(y) / D) / K_hat; };
}

ScalarFn cell_weight(const ScalarFn& Q, double D, double ell, GibbsNormalizers* out) {
  const GibbsNormalizers g = gibbs_normalizers(Q, D, ell);
  if (out) *out = g;
  return cell_weight(Q, D, g.K_hat);
}

EffectiveModel effective_coefficients(const Landscape& landscape) {
  auto smooth = landscape.smooth_ptr();
  const double D = landscape.diffusivity();
  EffectiveModel m;
  m.D = D;
  if (!landscape.has_rough_part()) {
    m.K = m.K_hat = 1.0;
    m.ell = 1.0;
    m.weight = [](double) { return 1.0; };
    m.mean_weight = m.mean_weight_sq = 1.0;
    m.q = m.q_from_weight = 2.0 * D;
    m.r = [smooth](double x) { return -smooth->derivative(x); };
    return m;
  }
  if (landscape.kind() != LandscapeKind::periodic_rough)
    throw InvalidConfig("effective_coefficients needs a periodic rough landscape");

  auto rough = landscape.rough_ptr();
  const ScalarFn Q = [rough](double y) { return rough->value(y); };
  m.ell = rough->period();
  const GibbsNormalizers g = gibbs_normalizers(Q, D, m.ell);
  m.K = g.K;
  m.K_hat = g.K_hat;
  m.weight = cell_weight(Q, D, g.K_hat);

  // mu(dy) = e^{-Q/D} dy / (ell K); averages below are against mu.
  const ScalarFn w = m.weight;
  const double K = g.K;
  m.mean_weight =
      period_average([&](double y) { return w(y) * std::exp(-Q(y) / D) / K; }, m.ell);
  m.mean_weight_sq =
      period_average([&](double y) { return w(y) * w(y) * std::exp(-Q(y) / D) / K; }, m.ell);
  m.q_from_weight = 2.0 * D * m.mean_weight_sq;
  m.q = 2.0 * D / (g.K * g.K_hat);
  const double rate = 1.0 / (g.K * g.K_hat);
  m.r = [smooth, rate](double x) { return -rate * smooth->derivative(x); };
  return m;
}

HamiltonianCoefficients homogenized_coefficients(const EffectiveModel& model) {
  return {model.r, model.q};
}

namespace {

// Thomas algorithm for a non-periodic tridiagonal system; lower[0] and
// upper[n-1] are ignored.
std::vector<double> thomas(std::span<const double> lower, std::span<const double> diag,
                           std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), x(n);
  double beta = diag[0];
  if (std::abs(beta) < 1e-300) throw SingularSystem("zero pivot in tridiagonal solve");
  x[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = upper[i - 1] / beta;
    beta = diag[i] - lower[i] * c[i];
    if (std::abs(beta) < 1e-300) throw SingularSystem("zero pivot in tridiagonal solve");
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
  return x;
}

std::vector<double> apply_cyclic(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> x) {
  const std::size_t n = diag.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
    y[i] = lower[i] * x[im] + diag[i] * x[i] + upper[i] * x[ip];
  }
  return y;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw InvalidConfig("cyclic tridiagonal: size mismatch");
  if (n < 3) throw InvalidConfig("cyclic tridiagonal needs at least 3 unknowns");

  const double alpha = upper[n - 1];  // row n-1, column 0
  const double beta = lower[0];       // row 0, column n-1
  const double gamma = -diag[0];
  std::vector<double> bb(diag.begin(), diag.end());
  bb[0] = diag[0] - gamma;
  bb[n - 1] = diag[n - 1] - alpha * beta / gamma;

  std::vector<double> x = thomas(lower, bb, upper, rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> z = thomas(lower, bb, upper, u);
  const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
  if (std::abs(denom) < 1e-300) throw SingularSystem("singular cyclic tridiagonal system");
  const double fact = (x[0] + beta * x[n - 1] / gamma) / denom;
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

std::vector<double> solve_regularized_cell_problem(std::span<const double> b,
                                                   std::span<const double> dQ, double D,
                                                   double rho, double spacing) {
  const std::size_t n = b.size();
  if (dQ.size() != n) throw InvalidConfig("cell problem: b and Q' sizes differ");
  if (!(rho > 0.0)) throw InvalidConfig("cell problem needs rho > 0");
  if (!(D > 0.0) || !(spacing > 0.0)) throw InvalidConfig("cell problem needs D, spacing > 0");

  const double h = spacing;
  std::vector<double> lower(n), diag(n), upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    lower[i] = -D / (h * h) - dQ[i] / (2.0 * h);
    diag[i] = rho + 2.0 * D / (h * h);
    upper[i] = -D / (h * h) + dQ[i] / (2.0 * h);
  }
  std::vector<double> chi = solve_cyclic_tridiagonal(lower, diag, upper, b);

  // One step of iterative refinement; the system is badly conditioned as rho -> 0.
  const double bnorm = norm2(b);
  std::vector<double> res = apply_cyclic(lower, diag, upper, chi);
  for (std::size_t i = 0; i < n; ++i) res[i] = b[i] - res[i];
  const std::vector<double> corr = solve_cyclic_tridiagonal(lower, diag, upper, res);
  for (std::size_t i = 0; i < n; ++i) chi[i] += corr[i];

  if (bnorm > 0.0) {
    res = apply_cyclic(lower, diag, upper, chi);
    for (std::size_t i = 0; i < n; ++i) res[i] = b[i] - res[i];
    const double rel = norm2(res) / bnorm;
    if (!(rel <= 1e-8)) {
      std::ostringstream os;
      os << "cell problem residual " << rel << " exceeds 1e-8";
      throw SingularSystem(os.str());
    }
  }
  return chi;
}

std::vector<double> periodic_derivative(std::span<const double> values, double spacing) {
  const std::size_t n = values.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = (values[(i + 1) % n] - values[(i + n - 1) % n]) / (2.0 * spacing);
  return d;
}

}  // namespace rareis
