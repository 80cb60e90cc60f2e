#include "rareis/random_env.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "rareis/errors.hpp"
#include "rareis/rng.hpp"

namespace rareis {

Covariance squared_exponential(double variance, double length) {
  return [variance, length](double s) {
    const double r = s / length;
    return variance * std::exp(-r * r);
  };
}

namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

void forward_fft(FftwBuffer& buf, std::size_t m) {
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_1d(static_cast<int>(m), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE));
  if (!plan) throw EmbeddingFailure("could not create FFT plan");
  fftw_execute(plan.get());
}

constexpr std::uint64_t kFieldStream = 0xfffffffffffffff0ULL;

std::size_t locate(const EnvironmentRealization& env, double y, double& s) {
  const double lo = env.lower();
  const double hi = env.upper();
  if (!(y >= lo && y <= hi)) {
    std::ostringstream os;
    os << "y=" << y << " outside sampled window [" << lo << ", " << hi << "]";
    throw OutOfWindow(os.str());
  }
  const double u = (y - lo) / env.spacing;
  auto i = static_cast<std::size_t>(u);
  if (i >= env.values.size() - 1) i = env.values.size() - 2;
  s = u - static_cast<double>(i);
  return i;
}

}  // namespace

double EnvironmentRealization::value(double y) const {
  double s;
  const std::size_t i = locate(*this, y, s);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * values[i] + h10 * spacing * slopes[i] + h01 * values[i + 1] +
         h11 * spacing * slopes[i + 1];
}

double EnvironmentRealization::derivative(double y) const {
  double s;
  const std::size_t i = locate(*this, y, s);
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * values[i] + d01 * values[i + 1]) / spacing + d10 * slopes[i] + d11 * slopes[i + 1];
}

EnvironmentRealization sample_field(const Covariance& covariance, double window, double spacing,
                                    std::uint64_t env_seed, double origin) {
  if (!(window > 0.0) || !(spacing > 0.0) || spacing > window)
    throw InvalidConfig("sample_field needs 0 < spacing <= window");
  const auto n = static_cast<std::size_t>(std::floor(window / spacing + 1e-9)) + 1;
  std::size_t m = 2;
  while (m < 2 * (n - 1)) m *= 2;

  FftwBuffer buf(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = std::min(j, m - j);
    buf.data[j][0] = covariance(spacing * static_cast<double>(k));
    buf.data[j][1] = 0.0;
  }
  forward_fft(buf, m);

  std::vector<double> eig(m);
  double max_eig = 0.0, min_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    eig[k] = buf.data[k][0];
    max_eig = std::max(max_eig, eig[k]);
    min_eig = std::min(min_eig, eig[k]);
  }
  if (min_eig < -1e-10 * std::max(1.0, max_eig)) {
    std::ostringstream os;
    os << "circulant embedding has eigenvalue " << min_eig << " (largest " << max_eig << ")";
    throw EmbeddingFailure(os.str());
  }

  RngStream rng = make_rng_stream(env_seed, kFieldStream);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const double amp = std::sqrt(std::max(eig[k], 0.0)) * scale;
    buf.data[k][0] = amp * rng.normal();
    buf.data[k][1] = amp * rng.normal();
  }
  forward_fft(buf, m);

  EnvironmentRealization env;
  env.origin = origin;
  env.spacing = spacing;
  env.covariance = covariance;
  env.env_seed = env_seed;
  env.min_eigenvalue = min_eig;
  env.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) env.values[j] = buf.data[j][0];
  env.slopes.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (n == 1) {
      env.slopes[j] = 0.0;
    } else if (j == 0) {
      env.slopes[j] = (env.values[1] - env.values[0]) / spacing;
    } else if (j == n - 1) {
      env.slopes[j] = (env.values[n - 1] - env.values[n - 2]) / spacing;
    } else {
      env.slopes[j] = (env.values[j + 1] - env.values[j - 1]) / (2.0 * spacing);
    }
  }
  return env;
}

LognormalConstants lognormal_constants(double point_variance) {
  if (!(point_variance >= 0.0)) throw InvalidConfig("variance must be nonnegative");
  const double k = std::exp(0.5 * point_variance);
  return {k, k};
}

FieldPotential::FieldPotential(std::shared_ptr<const EnvironmentRealization> env)
    : env_(std::move(env)) {
  if (!env_ || env_->values.size() < 2) throw InvalidConfig("field potential needs a realization");
}

std::string FieldPotential::describe() const {
  std::ostringstream os;
  os << "gaussian_field(env_seed=" << env_->env_seed << ",window=[" << env_->lower() << ","
     << env_->upper() << "],spacing=" << env_->spacing << ")";
  return os.str();
}

std::function<double(double)> quenched_weight(std::shared_ptr<const EnvironmentRealization> env,
                                              double K_hat) {
  if (!(K_hat > 0.0)) throw InvalidConfig("K_hat must be positive");
  return [env = std::move(env), K_hat](double y) { return std::exp(env->value(y)) / K_hat; };
}

FeedbackControl random_env_control(const Subsolution& sub,
                                   std::shared_ptr<const EnvironmentRealization> env,
                                   double K_hat, double D, double delta) {
  if (!(delta > 0.0)) throw InvalidConfig("random_env_control needs delta > 0");
  return weighted_control(sub, std::sqrt(2.0 * D), quenched_weight(std::move(env), K_hat), delta);
}

}  // namespace rareis
