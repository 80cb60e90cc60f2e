#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rareis/landscapes.hpp"
#include "rareis/sde_engine.hpp"

namespace rareis {

enum class Execution { serial, parallel };

struct EstimatorOptions {
  std::string scheme_label = "mc";
  Execution execution = Execution::parallel;
  /// Keep per-path values and likelihood ratios in the output.
  bool keep_samples = false;
};

/// Summary of one Monte Carlo run. Per-path values are reduced in path-index
/// order, so the numbers do not depend on the thread count.
struct EstimatorOutput {
  double estimate = 0.0;
  double sample_variance = 0.0;  ///< unbiased (n - 1) variance of per-path values
  double second_moment = 0.0;    ///< mean of squared per-path values
  double second_moment_se = 0.0; ///< standard error of second_moment
  double rel_error_per_sample = 0.0;  ///< sqrt(sample_variance) / estimate; NaN if estimate <= 0
  double ci95_halfwidth = 0.0;
  std::size_t n = 0;
  std::size_t hits = 0;        ///< paths with a nonzero contribution
  std::size_t unresolved = 0;  ///< paths still inside the domain at the horizon (hit_before only)
  double runtime_seconds = 0.0;
  std::string scheme_label;
  SimulationConfig config;
  std::vector<double> values;       ///< filled when keep_samples
  std::vector<double> likelihoods;  ///< filled when keep_samples

  double std_error() const;
  /// sqrt(sample_variance) / reference: relative error per sample measured
  /// against another scheme's estimate.
  double rel_error_against(double reference) const;
};

/// Reduces per-path values (in order) into an EstimatorOutput.
EstimatorOutput summarize(const std::vector<double>& values, std::string label,
                          const SimulationConfig& config);

/// E[exp(-h(X_T)/eps)] with optional change of measure; no control gives
/// standard Monte Carlo.
EstimatorOutput estimate_terminal_functional(const Landscape& landscape,
                                             const std::function<double(double)>& h,
                                             const FeedbackControl& control,
                                             const SimulationConfig& config,
                                             const EstimatorOptions& options = {});

enum class ExitSide { lower, upper, either };

/// P[tau <= T] where tau is the exit time from `domain`, counting only exits
/// through `side`.
EstimatorOutput estimate_exit_probability(const Landscape& landscape, const Interval& domain,
                                          ExitSide side, const FeedbackControl& control,
                                          const SimulationConfig& config,
                                          const EstimatorOptions& options = {});

/// P[X hits b before a | X_0 = start]. config.T is the time cap; more than 1%
/// of paths unresolved at the cap raises CapTooSmall.
EstimatorOutput estimate_hit_before(const Landscape& landscape, double a, double b, double start,
                                    const FeedbackControl& control, const SimulationConfig& config,
                                    const EstimatorOptions& options = {});

struct DecayPoint {
  double epsilon;
  double rate;     ///< -eps log(second_moment)
  double rate_se;  ///< delta-method standard error
  double lower;    ///< bracket
  double upper;
};

struct DecayReport {
  std::vector<DecayPoint> points;
  std::size_t monotonicity_violations = 0;  ///< decreases beyond 2 combined SE
  std::size_t bracket_violations = 0;       ///< points outside the bracket beyond 2 SE
  bool nondecreasing() const { return monotonicity_violations == 0; }
  bool bracketed() const { return bracket_violations == 0; }
};

/// Inputs ordered by decreasing epsilon (at least three). The bracket is
/// [lower, upper], typically [G + U, 2G] at the start point.
DecayReport log_decay_diagnostic(const std::vector<EstimatorOutput>& runs, double lower,
                                 double upper);

/// Same, with per-run brackets (used when the subsolution depends on eps).
DecayReport log_decay_diagnostic(const std::vector<EstimatorOutput>& runs,
                                 const std::vector<double>& lower,
                                 const std::vector<double>& upper);

}  // namespace rareis
