#include "rareis/estimators.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "rareis/errors.hpp"

namespace rareis {

double EstimatorOutput::std_error() const {
  return n > 0 ? std::sqrt(sample_variance / static_cast<double>(n)) : 0.0;
}

double EstimatorOutput::rel_error_against(double reference) const {
  if (!(reference > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(sample_variance) / reference;
}

EstimatorOutput summarize(const std::vector<double>& values, std::string label,
                          const SimulationConfig& config) {
  EstimatorOutput out;
  out.n = values.size();
  out.scheme_label = std::move(label);
  out.config = config;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());

  double sum = 0.0;
  for (double v : values) {
    sum += v;
    if (v != 0.0) ++out.hits;
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.estimate = mean;
  out.sample_variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  out.second_moment = mean * mean + ss / n;

  double ss2 = 0.0;
  for (double v : values) {
    const double d = v * v - out.second_moment;
    ss2 += d * d;
  }
  out.second_moment_se = values.size() > 1 ? std::sqrt(ss2 / (n - 1.0) / n) : 0.0;

  out.rel_error_per_sample = mean > 0.0 ? std::sqrt(out.sample_variance) / mean
                                        : std::numeric_limits<double>::quiet_NaN();
  out.ci95_halfwidth = 1.96 * std::sqrt(out.sample_variance / n);
  return out;
}

namespace {

struct PathSample {
  double value;
  double likelihood;
  bool resolved;
};

/// Runs `fn(i)` for every path index, serially or with OpenMP, and stores
/// results by index. The first failing index (lowest) is rethrown.
template <class Fn>
std::vector<PathSample> run_paths(std::size_t n, Execution execution, Fn&& fn) {
  std::vector<PathSample> samples(n);
  std::vector<std::exception_ptr> errors;
  bool failed = false;
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) samples[i] = fn(i);
    return samples;
  }
  errors.resize(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 64) reduction(|| : failed)
  for (long long i = 0; i < count; ++i) {
    try {
      samples[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
      failed = true;
    }
  }
  if (failed) {
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return samples;
}

template <class PathValue>
EstimatorOutput run_estimator(const Landscape& landscape, const FeedbackControl& control,
                              const std::optional<Interval>& domain, const SimulationConfig& config,
                              const EstimatorOptions& options, PathValue&& path_value,
                              std::size_t* unresolved) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const double eps = config.epsilon;
  auto samples = run_paths(config.n_paths, options.execution, [&](std::size_t i) {
    RngStream stream = make_rng_stream(config.seed, i);
    const Trajectory path = simulate_controlled_path(landscape, control, domain, config, stream);
    const double log_z = control ? log_likelihood_ratio(path, eps) : 0.0;
    return path_value(path, log_z);
  });

  std::vector<double> values(samples.size());
  std::size_t open = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    values[i] = samples[i].value;
    if (!samples[i].resolved) ++open;
  }
  EstimatorOutput out = summarize(values, options.scheme_label, config);
  out.unresolved = open;
  if (unresolved) *unresolved = open;
  if (options.keep_samples) {
    out.values = std::move(values);
    out.likelihoods.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out.likelihoods[i] = samples[i].likelihood;
  }
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

bool side_matches(ExitSide want, int side) {
  switch (want) {
    case ExitSide::lower: return side < 0;
    case ExitSide::upper: return side > 0;
    case ExitSide::either: return side != 0;
  }
  return false;
}

}  // namespace

EstimatorOutput estimate_terminal_functional(const Landscape& landscape,
                                             const std::function<double(double)>& h,
                                             const FeedbackControl& control,
                                             const SimulationConfig& config,
                                             const EstimatorOptions& options) {
  if (!h) throw InvalidConfig("terminal functional needs h");
  const double eps = config.epsilon;
  return run_estimator(
      landscape, control, std::nullopt, config, options,
      [&](const Trajectory& path, double log_z) {
        const double z = std::exp(log_z);
        return PathSample{std::exp(-h(path.final_state()) / eps + log_z), z, true};
      },
      nullptr);
}

EstimatorOutput estimate_exit_probability(const Landscape& landscape, const Interval& domain,
                                          ExitSide side, const FeedbackControl& control,
                                          const SimulationConfig& config,
                                          const EstimatorOptions& options) {
  if (!(domain.lower < config.x0 && config.x0 < domain.upper))
    throw InvalidDomain("initial point must lie inside the domain");
  return run_estimator(
      landscape, control, domain, config, options,
      [&](const Trajectory& path, double log_z) {
        const double z = std::exp(log_z);
        const bool hit = path.exit && side_matches(side, path.exit->side);
        return PathSample{hit ? z : 0.0, z, true};
      },
      nullptr);
}

EstimatorOutput estimate_hit_before(const Landscape& landscape, double a, double b, double start,
                                    const FeedbackControl& control, const SimulationConfig& config,
                                    const EstimatorOptions& options) {
  if (!(a < b) || !(start >= a && start <= b))
    throw InvalidDomain("hit_before requires a < b and a <= start <= b");
  SimulationConfig cfg = config;
  cfg.x0 = start;
  std::size_t open = 0;
  EstimatorOutput out = run_estimator(
      landscape, control, Interval{a, b}, cfg, options,
      [&](const Trajectory& path, double log_z) {
        const double z = std::exp(log_z);
        if (!path.exit) return PathSample{0.0, z, false};
        return PathSample{path.exit->side > 0 ? z : 0.0, z, true};
      },
      &open);
  if (static_cast<double>(open) > 0.01 * static_cast<double>(cfg.n_paths)) {
    std::ostringstream os;
    os << open << " of " << cfg.n_paths << " paths unresolved at time cap " << cfg.T;
    throw CapTooSmall(os.str());
  }
  return out;
}

DecayReport log_decay_diagnostic(const std::vector<EstimatorOutput>& runs, double lower,
                                 double upper) {
  return log_decay_diagnostic(runs, std::vector<double>(runs.size(), lower),
                              std::vector<double>(runs.size(), upper));
}

DecayReport log_decay_diagnostic(const std::vector<EstimatorOutput>& runs,
                                 const std::vector<double>& lower,
                                 const std::vector<double>& upper) {
  if (runs.size() < 3) throw InvalidConfig("decay diagnostic needs at least three runs");
  if (lower.size() != runs.size() || upper.size() != runs.size())
    throw InvalidConfig("one bracket per run required");
  DecayReport report;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const double eps = r.config.epsilon;
    if (i > 0 && !(eps < runs[i - 1].config.epsilon))
      throw InvalidConfig("runs must be ordered by decreasing epsilon");
    DecayPoint p;
    p.epsilon = eps;
    p.rate = -eps * std::log(r.second_moment);
    p.rate_se = r.second_moment > 0.0 ? eps * r.second_moment_se / r.second_moment
                                      : std::numeric_limits<double>::infinity();
    p.lower = lower[i];
    p.upper = upper[i];
    if (p.rate < p.lower - 2.0 * p.rate_se || p.rate > p.upper + 2.0 * p.rate_se)
      ++report.bracket_violations;
    report.points.push_back(p);
  }
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    const auto& prev = report.points[i - 1];
    const auto& cur = report.points[i];
    const double se = std::hypot(prev.rate_se, cur.rate_se);
    if (cur.rate < prev.rate - 2.0 * se) ++report.monotonicity_violations;
  }
  return report;
}

}  // namespace rareis
