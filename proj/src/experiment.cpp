#include "rareis/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "rareis/errors.hpp"

#ifndef RAREIS_VERSION
#define RAREIS_VERSION "0.1.0"
#endif

namespace rareis {

std::string version_string() { return RAREIS_VERSION; }

// ---------------------------------------------------------------------------
// Terminal functional on a periodic rough landscape

TerminalStudy make_terminal_study(const Landscape& landscape, double T, double x0) {
  if (landscape.kind() != LandscapeKind::periodic_rough)
    throw InvalidConfig("terminal study needs a periodic rough landscape");
  const auto* quad = dynamic_cast<const QuadraticPotential*>(&landscape.smooth());
  if (!quad) throw InvalidConfig("terminal study needs a quadratic large-scale potential");
  EffectiveModel model = effective_coefficients(landscape);
  const double rate = quad->lambda() * model.rate_factor();
  Subsolution G = terminal_cost_G(rate, model.q, {-1.0, 1.0}, T);
  return TerminalStudy{landscape, std::move(model), std::move(G), T, x0};
}

FeedbackControl terminal_control(const TerminalStudy& study, const std::string& scheme,
                                 double delta) {
  if (scheme == "mc") return {};
  if (scheme == "optimal")
    return weighted_control(study.G, study.landscape.sigma(), study.model.weight, delta);
  if (scheme == "homogenized") return gradient_control(study.G, std::sqrt(study.model.q));
  throw ConfigError("unknown scheme '" + scheme + "' for the terminal study");
}

EstimatorOutput run_terminal_cell(const TerminalStudy& study, const std::string& scheme,
                                  const SimulationConfig& config, Execution execution) {
  SimulationConfig cfg = config;
  cfg.T = study.T;
  cfg.x0 = study.x0;
  const FeedbackControl control = terminal_control(study, scheme, cfg.delta);
  return estimate_terminal_functional(
      study.landscape, [&study](double x) { return study.h(x); }, control, cfg,
      {scheme, execution, false});
}

// ---------------------------------------------------------------------------
// Exit from a well

ExitStudy make_exit_study(const std::string& landscape_name, double kappa) {
  ExitStudy s{landscape_by_name(landscape_name), 0.0, 1.0, 0.5, {-1.0, 1.0},
              ExitSide::either, WellGeometry{}, 0.0, kappa};
  if (landscape_name == "quadratic") {
    const auto& quad = dynamic_cast<const QuadraticPotential&>(s.landscape.smooth());
    s.lambda = quad.lambda();
    s.rest = 0.0;
    s.L = 0.5 * s.lambda;
    s.domain = {-1.0, 1.0};
    s.side = ExitSide::either;
    s.geometry = {0.0, true, true};
    s.start = 0.0;
  } else if (landscape_name == "double_well") {
    const auto& dw = dynamic_cast<const DoubleWellPotential&>(s.landscape.smooth());
    s.lambda = dw.well_curvature();
    s.rest = -dw.half_width();
    s.L = dw.depth();
    s.domain = {-std::numeric_limits<double>::infinity(), 0.0};
    s.side = ExitSide::upper;
    s.geometry = {s.rest, false, true};
    s.start = s.rest;
  } else {
    throw ConfigError("exit study supports 'quadratic' and 'double_well', not '" +
                      landscape_name + "'");
  }
  return s;
}

Subsolution exit_subsolution(const ExitStudy& study, const std::string& scheme, double epsilon,
                             double T) {
  const double q = 2.0 * study.landscape.diffusivity();
  if (scheme == "qp") return quasipotential_subsolution(study.L, study.landscape, study.geometry);
  if (scheme == "exactG") return closed_form_G(study.lambda, study.L, T, q, study.geometry);
  if (scheme == "combined") {
    const MollificationParams p =
        make_mollification_params(epsilon, study.lambda, study.L, study.kappa, -1.0, 0.0, q);
    return combined_subsolution(p, study.landscape, T, study.geometry);
  }
  throw ConfigError("unknown scheme '" + scheme + "' for the exit study");
}

FeedbackControl exit_control(const ExitStudy& study, const std::string& scheme, double epsilon,
                             double T, double dt) {
  if (scheme == "mc") return {};
  const Subsolution sub = exit_subsolution(study, scheme, epsilon, T);
  const double sigma = study.landscape.sigma();
  if (scheme == "exactG") return capped_gradient_control(sub, sigma, T, 10.0 * dt);
  return gradient_control(sub, sigma);
}

EstimatorOutput run_exit_cell(const ExitStudy& study, const std::string& scheme,
                              const SimulationConfig& config, Execution execution) {
  SimulationConfig cfg = config;
  cfg.x0 = study.start;
  cfg.delta = 0.0;
  const FeedbackControl control = exit_control(study, scheme, cfg.epsilon, cfg.T, cfg.dt);
  return estimate_exit_probability(study.landscape, study.domain, study.side, control, cfg,
                                   {scheme, execution, false});
}

// ---------------------------------------------------------------------------
// Hitting problem in a random environment

std::shared_ptr<const EnvironmentRealization> sample_hit_environment(const HitStudy& study,
                                                                     double delta,
                                                                     std::uint64_t env_seed,
                                                                     double window) {
  if (!(delta > 0.0)) throw InvalidConfig("hit study needs delta > 0");
  const double origin = study.a / delta - study.margin;
  const double length = window > 0.0 ? window : (study.b - study.a) / delta + 2.0 * study.margin;
  return std::make_shared<const EnvironmentRealization>(sample_field(
      squared_exponential(study.point_variance, 1.0), length, study.spacing, env_seed, origin));
}

Landscape hit_landscape(const HitStudy& study, std::shared_ptr<const EnvironmentRealization> env) {
  return Landscape(std::make_shared<QuadraticPotential>(1.0),
                   std::make_shared<FieldPotential>(std::move(env)), study.D, "gaussian_field");
}

namespace {

Subsolution hit_subsolution(const HitStudy& study, const Landscape& landscape) {
  const double L = landscape.V(study.b) - landscape.V(0.0);
  return quasipotential_subsolution(L, landscape, 0.0);
}

}  // namespace

FeedbackControl hit_control(const HitStudy& study,
                            std::shared_ptr<const EnvironmentRealization> env,
                            const std::string& scheme, double delta) {
  if (scheme == "mc") return {};
  const Landscape landscape = hit_landscape(study, env);
  const Subsolution sub = hit_subsolution(study, landscape);
  const LognormalConstants k = lognormal_constants(study.point_variance / (study.D * study.D));
  if (scheme == "optimal") return random_env_control(sub, std::move(env), k.K_hat, study.D, delta);
  if (scheme == "homogenized") {
    const double q = 2.0 * study.D / (k.K * k.K_hat);
    return gradient_control(sub, std::sqrt(q));
  }
  throw ConfigError("unknown scheme '" + scheme + "' for the hitting study");
}

EstimatorOutput run_hit_cell(const HitStudy& study,
                             std::shared_ptr<const EnvironmentRealization> env,
                             const std::string& scheme, const SimulationConfig& config,
                             Execution execution) {
  const Landscape landscape = hit_landscape(study, env);
  const FeedbackControl control = hit_control(study, env, scheme, config.delta);
  SimulationConfig cfg = config;
  cfg.T = study.cap;
  return estimate_hit_before(landscape, study.a, study.b, study.start, control, cfg,
                             {scheme, execution, false});
}

// ---------------------------------------------------------------------------
// Presets

Preset parse_preset(const std::string& name) {
  if (name == "table1") return Preset::table1;
  if (name == "table3") return Preset::table3;
  if (name == "table4") return Preset::table4;
  if (name == "decay") return Preset::decay;
  if (name == "check-subsolution") return Preset::check_subsolution;
  if (name == "homogenize") return Preset::homogenize;
  if (name == "custom") return Preset::custom;
  throw UnknownPreset("unknown preset '" + name + "'");
}

const char* to_string(Preset preset) {
  switch (preset) {
    case Preset::table1: return "table1";
    case Preset::table3: return "table3";
    case Preset::table4: return "table4";
    case Preset::decay: return "decay";
    case Preset::check_subsolution: return "check-subsolution";
    case Preset::homogenize: return "homogenize";
    case Preset::custom: return "custom";
  }
  return "?";
}

namespace {

std::vector<GridCell> pair_rows(const std::vector<std::pair<double, double>>& rows,
                                const std::vector<std::string>& schemes, double T,
                                std::size_t n_paths) {
  std::vector<GridCell> cells;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& s : schemes) cells.push_back({r + 1, s, rows[r].first, rows[r].second, T, n_paths});
  return cells;
}

bool is_estimator_preset(Preset p) {
  return p != Preset::check_subsolution && p != Preset::homogenize;
}

std::string default_landscape(Preset p) {
  switch (p) {
    case Preset::table1: return "double_well";
    case Preset::table3: return "one_well_rough";
    case Preset::table4: return "gaussian_field";
    case Preset::homogenize: return "one_well_rough";
    default: return "quadratic";
  }
}

enum class StudyKind { exit, terminal, hit };

StudyKind study_kind(const std::string& landscape) {
  if (landscape == "one_well_rough") return StudyKind::terminal;
  if (landscape == "gaussian_field") return StudyKind::hit;
  return StudyKind::exit;
}

}  // namespace

std::vector<GridCell> preset_grid(Preset preset) {
  switch (preset) {
    case Preset::table1: {
      const double eps[] = {0.20, 0.16, 0.13, 0.11, 0.09, 0.07, 0.05};
      const double Ts[] = {2.5, 7.0, 10.0, 18.0, 23.0};
      std::vector<GridCell> cells;
      for (std::size_t r = 0; r < 7; ++r)
        for (double T : Ts) cells.push_back({r + 1, "combined", eps[r], 0.0, T, 10000});
      return cells;
    }
    case Preset::table3:
      return pair_rows({{0.25, 0.1},
                        {0.125, 0.04},
                        {0.0625, 0.015625},
                        {0.03125, 0.007},
                        {0.025, 0.004},
                        {0.02, 0.002},
                        {0.015, 0.0013}},
                       {"mc", "optimal", "homogenized"}, 1.0, 100000);
    case Preset::table4:
      return pair_rows({{0.25, 0.1},
                        {0.125, 0.04},
                        {0.0625, 0.018},
                        {0.05, 0.01},
                        {0.04, 0.007},
                        {0.025, 0.004}},
                       {"mc", "optimal", "homogenized"}, 20.0, 10000);
    case Preset::decay:
      return pair_rows({{0.2, 0.0}, {0.1, 0.0}, {0.05, 0.0}}, {"combined"}, 5.0, 100000);
    case Preset::check_subsolution:
      return pair_rows({{0.2, 0.0}, {0.1, 0.0}, {0.05, 0.0}}, {"qp", "combined"}, 5.0, 0);
    case Preset::homogenize:
      return {{1, "cell", 0.0, 0.0, 1.0, 0}};
    case Preset::custom:
      return pair_rows({{0.1, 0.0}}, {"mc", "combined"}, 1.0, 10000);
  }
  throw UnknownPreset("unknown preset");
}

// ---------------------------------------------------------------------------
// Configuration

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': not a nonnegative integer: '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += f(v[i]);
  }
  return s;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::set<std::size_t> parse_rows(const std::string& spec, std::size_t n_rows) {
  std::set<std::size_t> rows;
  const std::string s = trim(spec);
  if (s.empty()) {
    for (std::size_t r = 1; r <= n_rows; ++r) rows.insert(r);
    return rows;
  }
  auto parse_index = [&](const std::string& t) {
    const auto r = parse_u64("rows", t);
    if (r == 0 || r > n_rows)
      throw ConfigError("row " + t + " outside 1.." + std::to_string(n_rows));
    return static_cast<std::size_t>(r);
  };
  if (s.find(',') != std::string::npos) {
    for (const auto& item : split_list(s)) rows.insert(parse_index(item));
  } else if (const auto dash = s.find('-'); dash != std::string::npos) {
    const std::size_t lo = parse_index(s.substr(0, dash));
    const std::size_t hi = parse_index(s.substr(dash + 1));
    if (lo > hi) throw ConfigError("empty row range '" + s + "'");
    for (std::size_t r = lo; r <= hi; ++r) rows.insert(r);
  } else {
    const std::size_t k = parse_index(s);
    for (std::size_t r = 1; r <= k; ++r) rows.insert(r);
  }
  return rows;
}

}  // namespace

void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string v = trim(value);
  if (key == "preset") {
    preset = parse_preset(v);
  } else if (key == "landscape") {
    landscape = v;
  } else if (key == "schemes") {
    schemes = split_list(v);
  } else if (key == "eps") {
    eps = parse_double_list(key, v);
  } else if (key == "delta") {
    delta = parse_double_list(key, v);
  } else if (key == "t_horizon") {
    t_horizon = parse_double_list(key, v);
  } else if (key == "rows") {
    rows = v;
  } else if (key == "n_paths") {
    n_paths = static_cast<std::size_t>(parse_u64(key, v));
  } else if (key == "dt") {
    dt = parse_double(key, v);
  } else if (key == "seed") {
    seed = parse_u64(key, v);
  } else if (key == "env_seed") {
    env_seed = parse_u64(key, v);
  } else if (key == "window") {
    window = parse_double(key, v);
  } else if (key == "spacing") {
    spacing = parse_double(key, v);
  } else if (key == "cap") {
    cap = parse_double(key, v);
  } else if (key == "kappa") {
    kappa = parse_double(key, v);
  } else if (key == "x0") {
    if (v.empty()) x0.reset();
    else x0 = parse_double(key, v);
  } else if (key == "jobs") {
    jobs = static_cast<std::size_t>(parse_u64(key, v));
  } else if (key == "out") {
    out = v;
  } else if (key == "timing") {
    timing = parse_bool(key, v);
  } else if (key == "execution") {
    if (v == "serial") execution = Execution::serial;
    else if (v == "parallel") execution = Execution::parallel;
    else throw ConfigError("execution must be 'serial' or 'parallel'");
  } else {
    throw ConfigError("unknown key '" + raw_key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  auto d = [](double v) { return format_double(v); };
  return {
      {"preset", to_string(preset)},
      {"landscape", landscape},
      {"schemes", join(schemes, [](const std::string& s) { return s; })},
      {"eps", join(eps, d)},
      {"delta", join(delta, d)},
      {"t_horizon", join(t_horizon, d)},
      {"rows", rows},
      {"n_paths", std::to_string(n_paths)},
      {"dt", d(dt)},
      {"seed", std::to_string(seed)},
      {"env_seed", std::to_string(env_seed)},
      {"window", d(window)},
      {"spacing", d(spacing)},
      {"cap", d(cap)},
      {"kappa", d(kappa)},
      {"x0", x0 ? d(*x0) : std::string()},
      {"jobs", std::to_string(jobs)},
      {"out", out},
      {"timing", timing ? "true" : "false"},
      {"execution", execution == Execution::serial ? "serial" : "parallel"},
  };
}

void ExperimentConfig::validate() const {
  std::ostringstream why;
  if (dt < 0.0) why << "dt must be nonnegative; ";
  if (window < 0.0) why << "window must be nonnegative; ";
  if (!(spacing > 0.0)) why << "spacing must be positive; ";
  if (!(cap > 0.0)) why << "cap must be positive; ";
  if (!(kappa > 0.0 && kappa < 0.5)) why << "kappa must lie in (0, 1/2); ";
  if (jobs == 0) why << "jobs must be at least 1; ";
  for (double e : eps)
    if (!(e > 0.0)) why << "eps values must be positive; ";
  for (double dl : delta)
    if (dl < 0.0) why << "delta values must be nonnegative; ";
  for (double T : t_horizon)
    if (!(T > 0.0)) why << "t_horizon values must be positive; ";
  if (is_estimator_preset(preset) && n_paths != 0 && n_paths < 1000)
    why << "n_paths must be at least 1000 for estimator presets; ";
  const std::string msg = why.str();
  if (!msg.empty()) throw ConfigError(msg.substr(0, msg.size() - 2));
}

void load_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_from_csv(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  const std::string prefix = "# config.";
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) break;
    if (line.rfind(prefix, 0) != 0) continue;
    const std::string body = line.substr(prefix.size());
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed header line: " + line);
    config.set(body.substr(0, eq), body.substr(eq + 1));
    any = true;
  }
  if (!any) throw ConfigError("'" + path + "' has no echoed configuration");
}

double cell_dt(const ExperimentConfig& config, double delta, double T) {
  double dt = config.dt > 0.0 ? config.dt : (delta > 0.0 ? std::min(1e-3, 0.5 * delta * delta) : 1e-3);
  return std::min(dt, T);
}

std::vector<GridCell> expand_cells(const ExperimentConfig& config) {
  config.validate();
  const std::vector<GridCell> base = preset_grid(config.preset);

  // Distinct (eps, delta) rows, T columns and schemes of the preset grid.
  std::vector<std::pair<double, double>> rows;
  std::vector<double> Ts;
  std::vector<std::string> schemes;
  for (const auto& c : base) {
    if (c.row > rows.size()) rows.emplace_back(c.epsilon, c.delta);
    if (std::find(Ts.begin(), Ts.end(), c.T) == Ts.end()) Ts.push_back(c.T);
    if (std::find(schemes.begin(), schemes.end(), c.scheme) == schemes.end())
      schemes.push_back(c.scheme);
  }
  const std::size_t n_paths = config.n_paths ? config.n_paths : base.front().n_paths;

  if (!config.eps.empty()) {
    std::vector<std::pair<double, double>> custom;
    for (std::size_t i = 0; i < config.eps.size(); ++i) {
      double dl = 0.0;
      if (config.delta.size() == config.eps.size()) dl = config.delta[i];
      else if (config.delta.size() == 1) dl = config.delta[0];
      else if (!config.delta.empty())
        throw ConfigError("delta list must have one entry or one per eps");
      else if (config.eps.size() == rows.size()) dl = rows[i].second;
      else if (rows.front().second > 0.0)
        throw ConfigError("this preset needs a delta for every eps");
      custom.emplace_back(config.eps[i], dl);
    }
    rows = std::move(custom);
  } else if (!config.delta.empty()) {
    if (config.delta.size() == 1) {
      for (auto& r : rows) r.second = config.delta[0];
    } else if (config.delta.size() == rows.size()) {
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].second = config.delta[i];
    } else {
      throw ConfigError("delta list must have one entry or one per row");
    }
  }
  if (!config.t_horizon.empty()) Ts = config.t_horizon;
  if (!config.schemes.empty()) schemes = config.schemes;
  if (rows.empty() || Ts.empty() || schemes.empty()) throw ConfigError("empty grid");

  if (config.preset == Preset::table3 || config.preset == Preset::table4) {
    for (const auto& r : rows)
      if (!(r.second > 0.0) || !(r.first / r.second > 1.0))
        throw ConfigError("table3/table4 rows need eps/delta > 1");
  }

  const std::set<std::size_t> keep = parse_rows(config.rows, rows.size());
  std::vector<GridCell> cells;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!keep.count(r + 1)) continue;
    for (double T : Ts)
      for (const auto& s : schemes)
        cells.push_back({r + 1, s, rows[r].first, rows[r].second, T, n_paths});
  }
  return cells;
}

std::string output_path(const ExperimentConfig& config) {
  if (!config.out.empty()) return config.out;
  const std::string name = std::string(to_string(config.preset)) + ".csv";
  if (const char* dir = std::getenv("RAREIS_OUT_DIR"); dir && *dir) {
    std::string d = dir;
    if (d.back() != '/') d += '/';
    return d + name;
  }
  return name;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

template <class Fn>
void for_each_cell(std::size_t n, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(jobs))
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string reference_scheme(StudyKind kind) {
  return kind == StudyKind::exit ? "combined" : "optimal";
}

ResultTable run_estimators(const ExperimentConfig& config, const std::vector<GridCell>& cells,
                           const std::string& landscape_name) {
  const StudyKind kind = study_kind(landscape_name);
  ResultTable table;
  table.summary.emplace_back("landscape", landscape_name);

  std::optional<TerminalStudy> terminal;
  std::optional<ExitStudy> exit;
  HitStudy hit;
  hit.spacing = config.spacing;
  hit.cap = config.cap;
  std::map<std::size_t, std::shared_ptr<const EnvironmentRealization>> envs;

  switch (kind) {
    case StudyKind::terminal:
      terminal = make_terminal_study(landscape_by_name(landscape_name), 1.0, config.x0.value_or(0.0));
      table.summary.emplace_back("K", format_double(terminal->model.K));
      table.summary.emplace_back("K_hat", format_double(terminal->model.K_hat));
      table.summary.emplace_back("q", format_double(terminal->model.q));
      break;
    case StudyKind::exit:
      exit = make_exit_study(landscape_name, config.kappa);
      if (config.x0) exit->start = *config.x0;
      table.summary.emplace_back("rest_point", format_double(exit->rest));
      table.summary.emplace_back("level_L", format_double(exit->L));
      table.summary.emplace_back("local_lambda", format_double(exit->lambda));
      table.summary.emplace_back("start", format_double(exit->start));
      break;
    case StudyKind::hit: {
      if (config.x0) hit.start = *config.x0;
      const LognormalConstants k = lognormal_constants(hit.point_variance);
      table.summary.emplace_back("env_seed", std::to_string(config.env_seed));
      table.summary.emplace_back("spacing", format_double(hit.spacing));
      table.summary.emplace_back("K_hat", format_double(k.K_hat));
      table.summary.emplace_back("start", format_double(hit.start));
      for (const auto& c : cells)
        if (!envs.count(c.row))
          envs[c.row] = sample_hit_environment(hit, c.delta, config.env_seed, config.window);
      break;
    }
  }

  std::vector<EstimatorOutput> outputs(cells.size());
  for_each_cell(cells.size(), config.jobs, [&](std::size_t i) {
    const GridCell& c = cells[i];
    SimulationConfig sc;
    sc.epsilon = c.epsilon;
    sc.delta = c.delta;
    sc.T = kind == StudyKind::hit ? hit.cap : c.T;
    sc.dt = cell_dt(config, c.delta, sc.T);
    sc.n_paths = c.n_paths;
    sc.seed = config.seed;
    switch (kind) {
      case StudyKind::terminal:
        outputs[i] = run_terminal_cell(*terminal, c.scheme, sc, config.execution);
        break;
      case StudyKind::exit:
        outputs[i] = run_exit_cell(*exit, c.scheme, sc, config.execution);
        break;
      case StudyKind::hit:
        outputs[i] = run_hit_cell(hit, envs.at(c.row), c.scheme, sc, config.execution);
        break;
    }
  });

  table.columns = {"row", "scheme", "eps", "delta", "T", "dt", "n", "estimate", "std_error",
                   "ci95_halfwidth", "rel_error_per_sample", "rho_vs_reference", "second_moment",
                   "hits", "runtime_seconds"};
  if (kind == StudyKind::hit) {
    table.columns.push_back("window_lo");
    table.columns.push_back("window_hi");
  }
  const std::string ref = reference_scheme(kind);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const GridCell& c = cells[i];
    const EstimatorOutput& o = outputs[i];
    double reference = o.estimate;
    for (std::size_t j = 0; j < cells.size(); ++j)
      if (cells[j].row == c.row && cells[j].T == c.T && cells[j].scheme == ref)
        reference = outputs[j].estimate;
    std::vector<std::string> row = {
        std::to_string(c.row),
        c.scheme,
        format_double(c.epsilon),
        format_double(c.delta),
        format_double(o.config.T),
        format_double(o.config.dt),
        std::to_string(o.n),
        format_double(o.estimate),
        format_double(o.std_error()),
        format_double(o.ci95_halfwidth),
        format_double(o.rel_error_per_sample),
        format_double(o.rel_error_against(reference)),
        format_double(o.second_moment),
        std::to_string(o.hits),
        format_double(config.timing ? o.runtime_seconds : 0.0)};
    if (kind == StudyKind::hit) {
      row.push_back(format_double(envs.at(c.row)->lower()));
      row.push_back(format_double(envs.at(c.row)->upper()));
    }
    table.rows.push_back(std::move(row));
  }

  if (config.preset == Preset::decay) {
    if (kind != StudyKind::exit) throw ConfigError("decay preset needs an exit landscape");
    std::vector<EstimatorOutput> runs;
    std::vector<double> lo, hi;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].scheme != "combined") continue;
      const double T = cells[i].T;
      const double G = exit_subsolution(*exit, "exactG", cells[i].epsilon, T).value(0.0, exit->start);
      const double U = exit_subsolution(*exit, "combined", cells[i].epsilon, T).value(0.0, exit->start);
      runs.push_back(outputs[i]);
      lo.push_back(G + U);
      hi.push_back(2.0 * G);
    }
    const DecayReport report = log_decay_diagnostic(runs, lo, hi);
    for (const auto& p : report.points) {
      const std::string k = "decay.eps_" + format_double(p.epsilon);
      table.summary.emplace_back(k + ".rate", format_double(p.rate));
      table.summary.emplace_back(k + ".rate_se", format_double(p.rate_se));
      table.summary.emplace_back(k + ".bracket_lo", format_double(p.lower));
      table.summary.emplace_back(k + ".bracket_hi", format_double(p.upper));
    }
    table.summary.emplace_back("decay.nondecreasing", report.nondecreasing() ? "true" : "false");
    table.summary.emplace_back("decay.bracketed", report.bracketed() ? "true" : "false");
  }
  return table;
}

ResultTable run_check(const ExperimentConfig& config, const std::vector<GridCell>& cells,
                      const std::string& landscape_name) {
  const ExitStudy study = make_exit_study(landscape_name, config.kappa);
  const HamiltonianCoefficients coeffs = gradient_coefficients(study.landscape);
  ResultTable table;
  table.summary.emplace_back("landscape", landscape_name);
  table.columns = {"row", "scheme", "eps", "T", "min_residual", "argmin_t", "argmin_x",
                   "points_checked", "boundary_violations", "terminal_violations", "passed"};
  bool all = true;
  for (const auto& c : cells) {
    const Subsolution sub = exit_subsolution(study, c.scheme, c.epsilon, c.T);
    CheckGrid grid;
    grid.t_lo = 0.0;
    grid.t_hi = c.scheme == "exactG" ? c.T - 1e-2 : c.T;
    grid.x_lo = std::isfinite(study.domain.lower) ? study.domain.lower : study.rest - 1.0;
    grid.x_hi = study.domain.upper;
    BoundaryConditions bc;
    bc.T = c.T;
    if (study.side != ExitSide::upper) bc.target_points.push_back(study.domain.lower);
    if (study.side != ExitSide::lower) bc.target_points.push_back(study.domain.upper);
    const SubsolutionReport r = check_subsolution(sub, coeffs, grid, bc, 1e-8);
    const bool ok = r.passed(1e-8);
    all = all && ok;
    table.rows.push_back({std::to_string(c.row), c.scheme, format_double(c.epsilon),
                          format_double(c.T), format_double(r.min_residual),
                          format_double(r.argmin_t), format_double(r.argmin_x),
                          std::to_string(r.points_checked), std::to_string(r.boundary_violations),
                          std::to_string(r.terminal_violations), ok ? "true" : "false"});
  }
  table.summary.emplace_back("all_passed", all ? "true" : "false");
  return table;
}

ResultTable run_homogenize(const std::string& landscape_name) {
  const Landscape landscape = landscape_by_name(landscape_name);
  const EffectiveModel m = effective_coefficients(landscape);
  ResultTable table;
  table.summary.emplace_back("landscape", landscape_name);
  table.columns = {"name", "y", "value"};
  auto scalar = [&](const char* name, double v) {
    table.rows.push_back({name, "", format_double(v)});
  };
  scalar("D", m.D);
  scalar("period", m.ell);
  scalar("K", m.K);
  scalar("K_hat", m.K_hat);
  scalar("q", m.q);
  scalar("q_from_weight", m.q_from_weight);
  scalar("mean_weight", m.mean_weight);
  scalar("mean_weight_sq", m.mean_weight_sq);
  scalar("rate_factor", m.rate_factor());
  const std::size_t samples = 64;
  for (std::size_t i = 0; i < samples; ++i) {
    const double y = m.ell * static_cast<double>(i) / static_cast<double>(samples);
    table.rows.push_back({"weight", format_double(y), format_double(m.weight(y))});
  }
  return table;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  const std::vector<GridCell> cells = expand_cells(config);
  const std::string landscape =
      config.landscape.empty() ? default_landscape(config.preset) : config.landscape;
  switch (config.preset) {
    case Preset::homogenize: return run_homogenize(landscape);
    case Preset::check_subsolution: return run_check(config, cells, landscape);
    default: return run_estimators(config, cells, landscape);
  }
}

void write_csv(std::ostream& os, const ExperimentConfig& config, const ResultTable& table) {
  os << "# rareis " << version_string() << "\n";
  for (const auto& [k, v] : config.echo()) os << "# config." << k << " = " << v << "\n";
  for (const auto& [k, v] : table.summary) os << "# summary." << k << " = " << v << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

}  // namespace rareis
