#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rareis/estimators.hpp"
#include "rareis/homogenization.hpp"
#include "rareis/landscapes.hpp"
#include "rareis/random_env.hpp"
#include "rareis/subsolutions.hpp"

namespace rareis {

/// "0.1.0-g<describe>" baked in at configure time.
std::string version_string();

// ---------------------------------------------------------------------------
// Study kernels shared by the CLI, the tests and the benchmark.

/// Terminal functional E exp(-h(X_T)/eps) on a periodic rough landscape with
/// h(x) = (|x| - 1)^2, started at x0.
struct TerminalStudy {
  Landscape landscape;
  EffectiveModel model;
  Subsolution G;  ///< homogenized value function for h
  double T = 1.0;
  double x0 = 0.0;

  double h(double x) const {
    const double d = std::abs(x) - 1.0;
    return d * d;
  }
};

TerminalStudy make_terminal_study(const Landscape& landscape, double T = 1.0, double x0 = 0.0);

/// Schemes: "mc" (no control), "optimal" (cell-weighted), "homogenized".
FeedbackControl terminal_control(const TerminalStudy& study, const std::string& scheme,
                                 double delta);

EstimatorOutput run_terminal_cell(const TerminalStudy& study, const std::string& scheme,
                                  const SimulationConfig& config,
                                  Execution execution = Execution::parallel);

/// Exit from a potential well before time T. For "quadratic" the domain is
/// (-1, 1) around the rest point 0 with level L = 1/2; for "double_well" it
/// is the left basin (-inf, 0) around the rest point -1 with L the barrier
/// height and the local quadratic model of curvature V''(-1).
struct ExitStudy {
  Landscape landscape;
  double rest = 0.0;
  double lambda = 1.0;  ///< curvature of the local quadratic model
  double L = 0.5;
  Interval domain{-1.0, 1.0};
  ExitSide side = ExitSide::either;
  WellGeometry geometry;
  double start = 0.0;
  double kappa = 0.25;
};

ExitStudy make_exit_study(const std::string& landscape_name, double kappa = 0.25);

/// Schemes: "qp", "exactG", "combined".
Subsolution exit_subsolution(const ExitStudy& study, const std::string& scheme, double epsilon,
                             double T);

/// "mc" gives no control; "exactG" is evaluated no later than T - 10 dt.
FeedbackControl exit_control(const ExitStudy& study, const std::string& scheme, double epsilon,
                             double T, double dt);

EstimatorOutput run_exit_cell(const ExitStudy& study, const std::string& scheme,
                              const SimulationConfig& config,
                              Execution execution = Execution::parallel);

/// P[hit b before a | X_0 = start] for V = x^2/2, D = 1 and a Gaussian rough
/// potential with covariance exp(-s^2).
struct HitStudy {
  double a = 0.0;
  double b = 1.0;
  double start = 0.1;
  double D = 1.0;
  double point_variance = 1.0;
  double cap = 20.0;      ///< time cap
  double spacing = 0.02;  ///< field grid spacing
  double margin = 10.0;   ///< extra field window on each side, in y units
};

/// Field covering [a/delta - margin, b/delta + margin], or a window of the
/// given length starting at a/delta - margin when `window` > 0.
std::shared_ptr<const EnvironmentRealization> sample_hit_environment(const HitStudy& study,
                                                                     double delta,
                                                                     std::uint64_t env_seed,
                                                                     double window = 0.0);

Landscape hit_landscape(const HitStudy& study, std::shared_ptr<const EnvironmentRealization> env);

/// Schemes: "mc", "optimal" (quenched weight), "homogenized".
FeedbackControl hit_control(const HitStudy& study,
                            std::shared_ptr<const EnvironmentRealization> env,
                            const std::string& scheme, double delta);

EstimatorOutput run_hit_cell(const HitStudy& study,
                             std::shared_ptr<const EnvironmentRealization> env,
                             const std::string& scheme, const SimulationConfig& config,
                             Execution execution = Execution::parallel);

// ---------------------------------------------------------------------------
// Presets and configuration

enum class Preset { table1, table3, table4, decay, check_subsolution, homogenize, custom };

Preset parse_preset(const std::string& name);  ///< throws UnknownPreset
const char* to_string(Preset preset);

struct GridCell {
  std::size_t row = 1;  ///< 1-based row in the source grid
  std::string scheme;
  double epsilon = 0.0;
  double delta = 0.0;
  double T = 1.0;
  std::size_t n_paths = 0;
};

/// Full default grid of a preset with its default schemes and path counts.
std::vector<GridCell> preset_grid(Preset preset);

/// Flat key = value configuration; flags and files write through set().
struct ExperimentConfig {
  Preset preset = Preset::table3;
  std::string landscape;             ///< empty: preset default
  std::vector<std::string> schemes;  ///< empty: preset default
  std::vector<double> eps;           ///< empty: preset grid
  std::vector<double> delta;
  std::vector<double> t_horizon;
  std::string rows;        ///< "k" first k rows, "i-j" or "i,j,..." explicit rows; empty: all
  std::size_t n_paths = 0;  ///< 0: preset default
  double dt = 0.0;          ///< 0: min(1e-3, delta^2/2) on multiscale cells, else 1e-3
  std::uint64_t seed = 1;
  std::uint64_t env_seed = 1;
  double window = 0.0;  ///< 0: automatic
  double spacing = 0.02;
  double cap = 20.0;
  double kappa = 0.25;
  std::optional<double> x0;
  std::size_t jobs = 1;
  std::string out;
  bool timing = true;
  Execution execution = Execution::parallel;

  /// Throws ConfigError on an unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  /// Ordered (key, value) pairs; feeding them back through set() gives an
  /// equal configuration.
  std::vector<std::pair<std::string, std::string>> echo() const;
  void validate() const;
};

/// Reads `key = value` lines (`#` starts a comment) into `config`.
void load_config_file(const std::string& path, ExperimentConfig& config);

/// Reads the `# config.key = value` header of a CSV written by this tool.
void load_config_from_csv(const std::string& path, ExperimentConfig& config);

/// Expands the configuration into the cells that will be run.
std::vector<GridCell> expand_cells(const ExperimentConfig& config);

/// dt rule, or the configured override.
double cell_dt(const ExperimentConfig& config, double delta, double T);

struct ResultTable {
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ResultTable run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& os, const ExperimentConfig& config, const ResultTable& table);

/// Output file path: config.out, else $RAREIS_OUT_DIR/<preset>.csv, else ./<preset>.csv.
std::string output_path(const ExperimentConfig& config);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace rareis
