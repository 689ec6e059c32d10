#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "msim/cli/commands.hpp"
#include "msim/cli/parallel.hpp"
#include "msim/errors.hpp"

using namespace msim;
using namespace msim::cli;

namespace {

std::size_t column(const CsvDocument& d, const std::string& name) {
  for (std::size_t i = 0; i < d.columns.size(); ++i)
    if (d.columns[i] == name) return i;
  throw std::runtime_error("no column " + name);
}

}  // namespace

TEST_CASE("config text parsing") {
  const std::string text =
      "# bath and geometry\n"
      "output = \"run #1.csv\"   # trailing comment\n"
      "[geometry]\n"
      "r_d_nm = 200\n"
      "  orientation = perpendicular\n"
      "\n"
      "[phonon]\n"
      "temperature_k=4\n";
  const KeyValues kv = parse_config_text(text);
  REQUIRE(kv.size() == 4);
  CHECK(kv[0] == std::pair<std::string, std::string>{"output", "run #1.csv"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"geometry.r_d_nm", "200"});
  CHECK(kv[2] == std::pair<std::string, std::string>{"geometry.orientation", "perpendicular"});
  CHECK(kv[3] == std::pair<std::string, std::string>{"phonon.temperature_k", "4"});

  RunConfig cfg;
  apply_all(cfg, kv);
  CHECK(cfg.physical.geometry.r_d_nm == 200.0);
  CHECK(cfg.physical.geometry.orientation == Orientation::perpendicular);
  CHECK(cfg.physical.env.temperature == 4.0);
  CHECK(cfg.output == "run #1.csv");
}

TEST_CASE("malformed config lines report their position") {
  try {
    parse_config_text("a = 1\n[broken\n", "cfg.toml");
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("cfg.toml:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("just words\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("k = \"open\n"), InvalidArgument);
  CHECK_THROWS_AS(read_config_file("/nonexistent/config.toml"), InvalidArgument);
}

TEST_CASE("key application") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_key(cfg, "geometry.radius", "3"), InvalidArgument);
  CHECK_THROWS_AS(apply_key(cfg, "geometry.r_d_nm", "abc"), InvalidArgument);
  CHECK_THROWS_AS(apply_key(cfg, "geometry.r_d_nm", "1e400"), InvalidArgument);
  CHECK_THROWS_AS(apply_key(cfg, "dynamics.steps", "-2"), InvalidArgument);
  CHECK_THROWS_AS(apply_key(cfg, "photon.thermal", "yes"), InvalidArgument);
  apply_key(cfg, "drive.detuning", "-0.02");
  CHECK(cfg.physical.detuning == -0.02);
  apply_key(cfg, "drive.detuning", "resonant");
  CHECK(!cfg.physical.detuning);
  apply_key(cfg, "model.kind", "image");
  CHECK(cfg.model == ModelKind::image);
  const auto [k, v] = parse_assignment("phonon.alpha_ps2 = 0.05");
  CHECK(k == "phonon.alpha_ps2");
  CHECK(v == "0.05");
  CHECK_THROWS_AS(parse_assignment("novalue"), InvalidArgument);
}

TEST_CASE("described config round-trips") {
  RunConfig cfg;
  apply_key(cfg, "geometry.r_d_nm", "123.456");
  apply_key(cfg, "phonon.alpha_ps2", "0.1");
  apply_key(cfg, "sweep.scale", "log");
  apply_key(cfg, "dynamics.t_max_ps", "77");
  const auto desc = describe(cfg, std::nullopt);
  RunConfig back;
  for (const auto& [key, value] : desc) apply_key(back, key, value);
  CHECK(describe(back, std::nullopt) == desc);
}

TEST_CASE("sweep defaults and validation") {
  RunConfig cfg;
  const ResolvedSweep r = cfg.resolved_sweep(Command::rates);
  CHECK(r.min == 1e-4);
  CHECK(r.max == 3.0);
  CHECK(r.points == 1000);
  const ResolvedSweep f = cfg.resolved_sweep(Command::fraction);
  CHECK(f.scale == SweepScale::log);
  const auto v = f.values();
  CHECK(v.front() == 0.1);
  CHECK(v.back() == 100.0);
  CHECK(v[4] == doctest::Approx(1.0).epsilon(1e-14));
  cfg.sweep.points = 1;
  CHECK_THROWS_AS(cfg.resolved_sweep(Command::rates), InvalidArgument);
  cfg.sweep.points = 5;
  cfg.sweep.min = 0.0;
  CHECK_THROWS_AS(cfg.resolved_sweep(Command::fraction), InvalidArgument);
  cfg.sweep.min = 4.0;
  CHECK_THROWS_AS(cfg.resolved_sweep(Command::rates), InvalidArgument);
}

TEST_CASE("number formatting keeps every bit") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_number(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
    CHECK(s.find(',') == std::string::npos);
  }
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("thread count resolution") {
  RunConfig cfg;
  cfg.threads = 3;
  CHECK(resolve_threads(cfg) == 3);
  cfg.threads = 0;
  ::setenv("MIRROR_SIM_THREADS", "5", 1);
  CHECK(resolve_threads(cfg) == 5);
  ::unsetenv("MIRROR_SIM_THREADS");
  CHECK(resolve_threads(cfg) >= 1);
}

TEST_CASE("parallel map keeps input order and surfaces errors") {
  for (std::size_t workers : {1u, 2u, 7u}) {
    const auto out = parallel_map(100, workers, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == i * i);
  }
  const auto boom = [](std::size_t i) -> int {
    if (i == 13) throw NonConvergence("point 13");
    return static_cast<int>(i);
  };
  CHECK_THROWS_AS(parallel_map(50, 4, boom), NonConvergence);
  CHECK_THROWS_AS(parallel_map(50, 1, boom), NonConvergence);
}

TEST_CASE("csv layout") {
  CsvDocument d;
  d.header = {"mirror_sim test"};
  d.columns = {"a", "b"};
  d.add_row({1.0, 0.5});
  d.footer = {"done"};
  CHECK(to_csv(d) == "# mirror_sim test\na,b\n1,0.5\n# done\n");
  CHECK_THROWS_AS(d.add_row({1.0}), InvalidArgument);
}

TEST_CASE("rates command") {
  RunConfig cfg;
  const CommandResult r = run_command(Command::rates, cfg);
  const CsvDocument& d = r.document;
  REQUIRE(d.rows.size() == 1000);
  CHECK(d.columns == std::vector<std::string>{"r_over_lambda", "gamma_ratio_par", "shift_ratio_par",
                                               "gamma_ratio_perp", "shift_ratio_perp"});
  CHECK(d.rows.front()[0] == 1e-4);
  CHECK(d.rows.front()[1] < 1e-4);
  CHECK(std::abs(d.rows.front()[3] - 2.0) < 0.01);
  CHECK(std::abs(d.rows.back()[1] - 1.0) < 0.1);
  CHECK(d.header.front() == "mirror_sim rates");
  CHECK(std::find(d.header.begin(), d.header.end(), "sweep.points = 1000") != d.header.end());
}

TEST_CASE("output is identical across runs and worker counts") {
  RunConfig cfg;
  cfg.sweep.points = 200;
  cfg.threads = 1;
  const std::string a = to_csv(run_command(Command::rates, cfg).document);
  cfg.threads = 4;
  const std::string b = to_csv(run_command(Command::rates, cfg).document);
  CHECK(a == b);

  RunConfig dyn;
  dyn.physical.drive_amplitude = 0.05;
  dyn.steps = 50;
  CHECK(to_csv(run_command(Command::dynamics, dyn).document) == to_csv(run_command(Command::dynamics, dyn).document));
}

TEST_CASE("dynamics command") {
  RunConfig cfg;
  cfg.physical.drive_amplitude = 0.0;
  cfg.initial = InitialState::excited;
  cfg.steps = 40;
  const CommandResult r = run_command(Command::dynamics, cfg);
  const CsvDocument& d = r.document;
  const std::size_t t = column(d, "t_ps"), px = column(d, "pop_X"), p0 = column(d, "pop_0"),
                    tr = column(d, "trace");
  const double gamma = build_cavity_model(cfg.physical).params.gamma_photon;
  CHECK(d.rows.size() == 41);
  CHECK(d.rows.front()[px] == 1.0);
  CHECK(d.rows.front()[p0] == 0.0);
  CHECK(d.rows.back()[t] == doctest::Approx(10.0 / gamma));
  for (const auto& row : d.rows) {
    CHECK(std::abs(row[px] - std::exp(-gamma * row[t])) < 1e-8);
    CHECK(std::abs(row[tr] - 1.0) < 1e-10);
  }

  cfg.model = ModelKind::image;
  const CsvDocument img = run_command(Command::dynamics, cfg).document;
  CHECK(img.columns.size() == 1 + 4 + 12 + 2);
  CHECK(img.rows.front()[column(img, "pop_s")] == 1.0);
}

TEST_CASE("equivalence command") {
  RunConfig cfg;
  cfg.steps = 200;
  const CommandResult ok = run_command(Command::equivalence, cfg);
  CHECK(ok.exit_code == kExitOk);
  CHECK(ok.document.rows.front()[0] <= 1e-8);
  CHECK(ok.document.footer.front() == "result = PASS");

  cfg.selection_rules = false;
  const CommandResult bad = run_command(Command::equivalence, cfg);
  CHECK(bad.exit_code == kExitEquivalence);
  CHECK(bad.document.footer.front() == "result = FAIL");
  CHECK(bad.document.footer.back().find("leakage") != std::string::npos);

  RunConfig bare;
  bare.physical.env.alpha = 0.0;
  bare.steps = 200;
  CHECK(run_command(Command::equivalence, bare).document.rows.front()[0] <= 1e-9);
}

TEST_CASE("spectrum command") {
  RunConfig cfg;
  cfg.spectrum_max_rows = 201;
  const CommandResult r = run_command(Command::spectrum, cfg);
  const CsvDocument& d = r.document;
  CHECK(d.columns == std::vector<std::string>{"omega", "s_mirror", "s_free"});
  CHECK(d.rows.size() <= 201);
  CHECK(d.rows.size() % 2 == 1);
  CHECK(d.rows[d.rows.size() / 2][0] == 0.0);
  CHECK(d.rows.front()[0] == -d.rows.back()[0]);
  CHECK(std::abs(d.rows.back()[0]) <= 0.1);
  bool has_sideband = false;
  for (const auto& line : d.footer) has_sideband |= line.rfind("mirror.sideband_fraction = ", 0) == 0;
  CHECK(has_sideband);
}

TEST_CASE("undriven spectrum is a transient emission line") {
  RunConfig cfg;
  cfg.physical.drive_amplitude = 0.0;
  cfg.physical.env.alpha = 0.0;
  const CommandResult r = run_command(Command::spectrum, cfg);
  const CsvDocument& d = r.document;
  // The mirror emitter is dressed at rate gamma; its peak density is 2 / (pi gamma).
  const double gamma = build_cavity_model(cfg.physical).params.gamma_photon;
  const auto& centre = d.rows[d.rows.size() / 2];
  CHECK(centre[1] == doctest::Approx(2.0 / (std::numbers::pi * gamma)).epsilon(1e-3));
  CHECK(centre[2] == doctest::Approx(2.0 / (std::numbers::pi * cfg.physical.gamma0)).epsilon(1e-3));
}

TEST_CASE("invalid configuration is rejected before any work") {
  RunConfig cfg;
  cfg.physical.gamma0 = -1.0;
  CHECK_THROWS_AS(run_command(Command::rates, cfg), InvalidArgument);
  cfg = {};
  cfg.steps = 0;
  CHECK_THROWS_AS(run_command(Command::dynamics, cfg), InvalidArgument);
}
