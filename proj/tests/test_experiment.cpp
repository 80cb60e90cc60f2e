#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rareis/errors.hpp"
#include "rareis/experiment.hpp"

using namespace rareis;

TEST_CASE("table presets carry their full grids") {
  const auto t3 = preset_grid(Preset::table3);
  REQUIRE(t3.size() == 21);
  const double eps3[] = {0.25, 0.125, 0.0625, 0.03125, 0.025, 0.02, 0.015};
  const double del3[] = {0.1, 0.04, 0.015625, 0.007, 0.004, 0.002, 0.0013};
  for (std::size_t i = 0; i < t3.size(); ++i) {
    CHECK(t3[i].row == i / 3 + 1);
    CHECK(t3[i].epsilon == eps3[i / 3]);
    CHECK(t3[i].delta == del3[i / 3]);
    CHECK(t3[i].T == 1.0);
  }
  CHECK(t3[0].scheme == "mc");
  CHECK(t3[1].scheme == "optimal");
  CHECK(t3[2].scheme == "homogenized");

  const auto t4 = preset_grid(Preset::table4);
  REQUIRE(t4.size() == 18);
  const double eps4[] = {0.25, 0.125, 0.0625, 0.05, 0.04, 0.025};
  const double del4[] = {0.1, 0.04, 0.018, 0.01, 0.007, 0.004};
  for (std::size_t i = 0; i < t4.size(); ++i) {
    CHECK(t4[i].epsilon == eps4[i / 3]);
    CHECK(t4[i].delta == del4[i / 3]);
  }

  const auto t1 = preset_grid(Preset::table1);
  REQUIRE(t1.size() == 35);
  CHECK(t1.front().epsilon == 0.20);
  CHECK(t1.back().epsilon == 0.05);
  CHECK(t1[0].T == 2.5);
  CHECK(t1[4].T == 23.0);
}

TEST_CASE("preset names") {
  for (Preset p : {Preset::table1, Preset::table3, Preset::table4, Preset::decay,
                   Preset::check_subsolution, Preset::homogenize, Preset::custom})
    CHECK(parse_preset(to_string(p)) == p);
  CHECK_THROWS_AS(parse_preset("table2"), UnknownPreset);
}

TEST_CASE("config keys and values are validated") {
  ExperimentConfig c;
  CHECK_THROWS_AS(c.set("n_pathz", "10"), ConfigError);
  CHECK_THROWS_AS(c.set("n_paths", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("eps", "0.1,x"), ConfigError);
  CHECK_THROWS_AS(c.set("timing", "maybe"), ConfigError);
  c.set("n-paths", "500");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.set("n_paths", "1000");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("echo feeds back into an equal configuration") {
  ExperimentConfig a;
  a.set("preset", "table4");
  a.set("rows", "2-3");
  a.set("eps", "0.3, 0.1");
  a.set("delta", "0.1,0.02");
  a.set("x0", "0.2");
  a.set("seed", "77");
  a.set("timing", "false");
  a.set("dt", "0.1");
  ExperimentConfig b;
  for (const auto& [k, v] : a.echo()) b.set(k, v);
  CHECK(a.echo() == b.echo());
}

TEST_CASE("row selection") {
  ExperimentConfig c;
  c.set("preset", "table3");
  c.set("rows", "2");
  CHECK(expand_cells(c).size() == 6);
  c.set("rows", "3-4");
  auto cells = expand_cells(c);
  REQUIRE(cells.size() == 6);
  CHECK(cells.front().row == 3);
  CHECK(cells.back().row == 4);
  c.set("rows", "1,7");
  cells = expand_cells(c);
  REQUIRE(cells.size() == 6);
  CHECK(cells.back().epsilon == 0.015);
  c.set("rows", "8");
  CHECK_THROWS_AS(expand_cells(c), ConfigError);
  c.set("rows", "1");
  c.set("schemes", "optimal");
  CHECK(expand_cells(c).size() == 1);
}

TEST_CASE("multiscale cells need eps / delta > 1") {
  ExperimentConfig c;
  c.set("preset", "table3");
  c.set("eps", "0.1");
  c.set("delta", "0.2");
  CHECK_THROWS_AS(expand_cells(c), ConfigError);
}

TEST_CASE("time step rule") {
  ExperimentConfig c;
  CHECK(cell_dt(c, 0.1, 1.0) == doctest::Approx(1e-3));
  CHECK(cell_dt(c, 0.0013, 1.0) == doctest::Approx(0.0013 * 0.0013 / 2));
  CHECK(cell_dt(c, 0.0, 5.0) == doctest::Approx(1e-3));
  c.dt = 0.05;
  CHECK(cell_dt(c, 0.001, 1.0) == 0.05);
  c.dt = 3.0;
  CHECK(cell_dt(c, 0.0, 1.0) == 1.0);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.25e-1, 1e-300, 123456789.123, -0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("homogenize preset reports the Bessel constant") {
  ExperimentConfig c;
  c.set("preset", "homogenize");
  const ResultTable t = run_experiment(c);
  bool found = false;
  for (const auto& row : t.rows) {
    if (row[0] != "q") continue;
    found = true;
    const double i0 = std::cyl_bessel_i(0.0, std::sqrt(2.0));
    CHECK(std::stod(row[2]) == doctest::Approx(2.0 / (i0 * i0)).epsilon(1e-10));
  }
  CHECK(found);
}

TEST_CASE("csv output replays to identical bytes") {
  ExperimentConfig c;
  c.set("preset", "custom");
  c.set("landscape", "quadratic");
  c.set("n_paths", "1000");
  c.set("eps", "0.3");
  c.set("timing", "false");
  std::ostringstream first;
  write_csv(first, c, run_experiment(c));

  const auto path = std::filesystem::temp_directory_path() / "rareis_replay_test.csv";
  {
    std::ofstream f(path);
    f << first.str();
  }
  ExperimentConfig r;
  load_config_from_csv(path.string(), r);
  std::filesystem::remove(path);
  std::ostringstream second;
  write_csv(second, r, run_experiment(r));
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind("# rareis " + version_string(), 0) == 0);
}

TEST_CASE("output path honours the environment") {
  ExperimentConfig c;
  c.set("preset", "decay");
  CHECK(output_path(c).ends_with("decay.csv"));
  c.out = "x/y.csv";
  CHECK(output_path(c) == "x/y.csv");
}
