#include "rareis/sde_engine.hpp"

#include <cmath>
#include <sstream>

#include "rareis/errors.hpp"

namespace rareis {

void SimulationConfig::validate() const {
  std::ostringstream why;
  if (!(epsilon > 0.0)) why << "epsilon must be positive; ";
  if (!(delta >= 0.0)) why << "delta must be nonnegative; ";
  if (!(T > t0)) why << "T must exceed t0; ";
  if (!(dt > 0.0)) why << "dt must be positive; ";
  if (T > t0 && dt > (T - t0) * (1.0 + 1e-12)) why << "dt exceeds the horizon; ";
  if (delta > 0.0 && dt > delta * delta * (1.0 + 1e-12))
    why << "dt must not exceed delta^2 when delta > 0; ";
  if (n_paths == 0) why << "n_paths must be positive; ";
  if (!std::isfinite(x0)) why << "x0 must be finite; ";
  const std::string msg = why.str();
  if (!msg.empty()) throw InvalidConfig(msg.substr(0, msg.size() - 2));
}

std::size_t SimulationConfig::n_steps() const {
  const double ratio = (T - t0) / dt;
  const auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  return n == 0 ? 1 : n;
}

Trajectory simulate_controlled_path(const Landscape& landscape, const FeedbackControl& control,
                                    const std::optional<Interval>& domain,
                                    const SimulationConfig& config, RngStream& stream,
                                    const PathOptions& options) {
  if (domain && !(domain->lower < domain->upper))
    throw InvalidDomain("domain requires lower < upper");
  if (landscape.has_rough_part() && !(config.delta > 0.0))
    throw InvalidConfig("a rough landscape needs delta > 0");

  const double eps = config.epsilon;
  const double delta = config.delta;
  const double sigma = landscape.sigma();
  const double noise = std::sqrt(eps) * sigma;
  const std::size_t n = config.n_steps();

  Trajectory path;
  if (options.record) {
    path.times.reserve(n + 1);
    path.states.reserve(n + 1);
  }
  path.times.push_back(config.t0);
  path.states.push_back(config.x0);

  double x = config.x0;
  double t = config.t0;

  auto outside = [&](double v) -> int {
    if (!domain) return 0;
    if (v <= domain->lower) return -1;
    if (v >= domain->upper) return 1;
    return 0;
  };

  if (int side = outside(x)) {
    path.exit = ExitRecord{t, side};
    return path;
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double t_next = (k + 1 == n) ? config.T : config.t0 + static_cast<double>(k + 1) * config.dt;
    const double h = t_next - t;
    const double dW = std::sqrt(h) * stream.normal();
    double drift = landscape.drift(x, eps, delta);
    if (control) {
      const double u = control(t, x);
      drift += sigma * u;
      path.int_u_dW += u * dW;
      path.int_u_sq += u * u * h;
    }
    x += drift * h + noise * dW;
    t = t_next;
    if (!std::isfinite(x) || !std::isfinite(path.int_u_dW)) {
      std::ostringstream os;
      os << "state became non-finite at t=" << t << " (stream " << stream.stream_id() << ")";
      throw NonFiniteState(os.str());
    }
    if (options.record) {
      path.times.push_back(t);
      path.states.push_back(x);
    }
    if (int side = outside(x)) {
      path.exit = ExitRecord{t, side};
      break;
    }
  }
  if (!options.record) {
    path.times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

}  // namespace rareis
