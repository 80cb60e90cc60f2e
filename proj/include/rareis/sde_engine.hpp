#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rareis/landscapes.hpp"
#include "rareis/rng.hpp"

namespace rareis {

/// Time-stepping parameters shared by all paths of one estimator run.
struct SimulationConfig {
  double epsilon = 0.1;
  double delta = 0.0;  ///< microscale; 0 disables the rough drift term
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  double x0 = 0.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig when an invariant is violated.
  void validate() const;
  std::size_t n_steps() const;
};

/// Absorbing interval (lower, upper).
struct Interval {
  double lower;
  double upper;
};

struct ExitRecord {
  double time;
  int side;  ///< -1 left through `lower`, +1 right through `upper`
};

/// One simulated path. When recording is off, `times`/`states` hold only the
/// initial and final points; the Girsanov accumulators are always complete.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;
  double int_u_dW = 0.0;  ///< sum of u_k * dW_k
  double int_u_sq = 0.0;  ///< sum of u_k^2 * dt_k
  std::optional<ExitRecord> exit;

  double final_time() const { return times.back(); }
  double final_state() const { return states.back(); }
};

/// u(t, x). An empty function means "no change of measure".
using FeedbackControl = std::function<double(double t, double x)>;

struct PathOptions {
  bool record = false;
};

/// Euler-Maruyama for
///   dX = [-(eps/delta) Q'(X/delta) - V'(X) + sigma u(t, X)] dt + sqrt(eps) sigma dW,
/// sigma = sqrt(2D), with the control evaluated at the left endpoint of each
/// step. Stops at the first grid time the state leaves `domain`.
Trajectory simulate_controlled_path(const Landscape& landscape, const FeedbackControl& control,
                                    const std::optional<Interval>& domain,
                                    const SimulationConfig& config, RngStream& stream,
                                    const PathOptions& options = {});

/// log of the likelihood ratio dP/dPbar accumulated along a path.
inline double log_likelihood_ratio(const Trajectory& path, double epsilon) {
  return -path.int_u_sq / (2.0 * epsilon) - path.int_u_dW / std::sqrt(epsilon);
}

}  // namespace rareis
