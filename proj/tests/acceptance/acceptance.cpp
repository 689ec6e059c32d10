// Acceptance checks for the simulator. Prints one PASS/FAIL line per criterion
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msim/cli/commands.hpp"
#include "msim/errors.hpp"
#include "msim/spectrum.hpp"

using namespace msim;
using namespace msim::cli;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Invariant bookkeeping shared by every run below; criterion 8 reports it.
struct Hygiene {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  double max_steady_residual = 0.0;
  std::size_t trajectories = 0;
  std::size_t steady_states = 0;

  void add(const TrajectoryStats& s) {
    max_trace_error = std::max(max_trace_error, s.max_trace_error);
    max_hermiticity_error = std::max(max_hermiticity_error, s.max_hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, s.min_eigenvalue);
    ++trajectories;
  }
  void add_steady(const LindbladModel& m) {
    const DensityMatrix ss = steady_state(m.liouvillian);
    max_steady_residual = std::max(max_steady_residual, steady_state_residual(m.liouvillian, ss));
    max_trace_error = std::max(max_trace_error, ss.trace_error());
    max_hermiticity_error = std::max(max_hermiticity_error, ss.hermiticity_error());
    min_eigenvalue = std::min(min_eigenvalue, ss.min_eigenvalue());
    ++steady_states;
  }
};

Hygiene hygiene;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome model_equivalence() {
  constexpr double kTol = 1e-7;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> r_d(20.0, 400.0), drive(0.01, 0.5), det(-0.1, 0.1);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0, worst_leak = 0.0;
  std::ostringstream where;
  for (int i = 0; i < 10; ++i) {
    PhysicalConfig c;
    c.geometry.r_d_nm = r_d(rng);
    c.drive_amplitude = drive(rng);
    c.detuning = det(rng);
    c.env.alpha = coin(rng) ? 0.03 : 0.0;
    c.env.temperature = coin(rng) ? 10.0 : 4.0;
    const double t_max = 10.0 / build_cavity_model(c).params.gamma_photon;
    const EquivalenceReport rep = equivalence_report(c, t_max, 1000);
    hygiene.add(rep.cavity_stats);
    hygiene.add(rep.image_stats);
    if (rep.max_deviation > worst) {
      worst = rep.max_deviation;
      where.str("");
      where << " (r_d " << fmt(c.geometry.r_d_nm) << " nm, drive " << fmt(c.drive_amplitude) << ")";
    }
    worst_leak = std::max(worst_leak, rep.max_leakage);
  }
  return {worst <= kTol && worst_leak <= 1e-10,
          "10 random configs, max deviation " + fmt(worst) + where.str() + ", max leakage " + fmt(worst_leak) +
              " (tol " + fmt(kTol) + ")"};
}

// Zero crossings of column `col` against column 0, by linear interpolation.
std::vector<double> crossings(const CsvDocument& d, std::size_t col, double offset) {
  std::vector<double> z;
  for (std::size_t i = 1; i < d.rows.size(); ++i) {
    const double a = d.rows[i - 1][col] - offset, b = d.rows[i][col] - offset;
    if (a == 0.0 || (a < 0.0) != (b < 0.0)) {
      const double u0 = d.rows[i - 1][0], u1 = d.rows[i][0];
      z.push_back(a == 0.0 ? u0 : u0 + (u1 - u0) * a / (a - b));
    }
  }
  return z;
}

Outcome surface_rates() {
  RunConfig cfg;
  const CsvDocument d = run_command(Command::rates, cfg).document;
  const double n = cfg.physical.geometry.refractive_index;
  const double near = d.rows.front()[1];
  const double far = d.rows.back()[1];
  const double shift_far = d.rows.back()[2];

  // F vanishes at even multiples of 1/(8n) in r/lambda0, G at odd multiples,
  // so successive sign changes of either are 1/(4n) apart.
  const double spacing = 1.0 / (4.0 * n);
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& [col, offset] : {std::pair{1u, 1.0}, std::pair{2u, 0.0}}) {
    const auto z = crossings(d, col, offset);
    for (std::size_t i = 1; i < z.size(); ++i) {
      worst = std::max(worst, std::abs((z[i] - z[i - 1]) / spacing - 1.0));
      ++count;
    }
  }
  const bool ok = near <= 1e-3 && std::abs(far - 1.0) <= 0.1 && std::abs(shift_far) <= 0.05 && count >= 20 &&
                  worst <= 0.15;
  return {ok, "gamma/gamma0 " + fmt(near) + " at r/lambda0 = 1e-4, " + fmt(far) + " at 3; shift ratio at 3 " +
                  fmt(shift_far) + "; " + std::to_string(count) + " zero spacings, worst off 1/(4n) by " +
                  fmt(100.0 * worst) + "% (tol 15%)"};
}

Outcome phonon_rate_properties() {
  PhononEnvironment env;
  double worst_kms = 0.0;
  for (double w : {0.1, 0.5, 1.0}) {
    const RateIntegrals k = rate_integrals(w, env);
    worst_kms = std::max(worst_kms, std::abs(k.up / k.down / std::exp(-env.beta() * w) - 1.0));
  }

  PhysicalConfig bare;
  bare.env.alpha = 0.0;
  bare.drive_amplitude = 0.3;
  const PhononRates z = build_cavity_model(bare).params.phonon;
  const double zero = std::max({z.gamma_down, z.gamma_up, std::abs(z.gamma_cd_down), std::abs(z.gamma_cd_up)});

  PhysicalConfig c;
  c.detuning = 0.2;
  c.drive_amplitude = 0.01;
  const LindbladModel m1 = build_cavity_model(c);
  c.drive_amplitude = 0.1;
  const LindbladModel m2 = build_cavity_model(c);
  const double scale = std::norm(m2.params.rabi_pn) / std::norm(m1.params.rabi_pn);
  const double lin = std::max({std::abs(m2.params.phonon.gamma_down / m1.params.phonon.gamma_down / scale - 1.0),
                               std::abs(m2.params.phonon.gamma_up / m1.params.phonon.gamma_up / scale - 1.0),
                               std::abs(std::abs(m2.params.phonon.gamma_cd_down) /
                                            std::abs(m1.params.phonon.gamma_cd_down) / scale -
                                        1.0)});
  return {worst_kms <= 0.01 && zero <= 1e-14 && lin <= 1e-10,
          "KMS deviation " + fmt(worst_kms) + " (tol 1e-2), rates at alpha = 0: " + fmt(zero) +
              " (tol 1e-14), |Omega|^2 scaling error " + fmt(lin) + " (tol 1e-10)"};
}

Outcome franck_condon_identities() {
  PhononEnvironment cold;
  cold.temperature = 0.0;
  const double a = cold.alpha, wc = cold.omega_c;
  const double b0 = std::abs(franck_condon(cold) - std::exp(-a * wc * wc / 4.0));
  double norm = 0.0;
  for (double t : {0.0, 4.0, 10.0, 30.0}) {
    PhononEnvironment env;
    env.temperature = t;
    const double b = franck_condon(env);
    norm = std::max(norm, std::abs(b * b * std::exp(phi(0.0, env).real()) - 1.0));
  }
  const double shift = std::abs(polaron_shift(PhononEnvironment{}) - a * wc * wc * wc * std::sqrt(std::numbers::pi) / 4.0);
  return {b0 <= 1e-10 && norm <= 1e-10 && shift <= 1e-10,
          "<B>(T=0) error " + fmt(b0) + ", <B>^2 e^phi(0) - 1 = " + fmt(norm) + ", polaron shift error " + fmt(shift) +
              " (tol 1e-10 each)"};
}

Outcome mollow_structure() {
  PhysicalConfig c;
  const LindbladModel unit = build_cavity_model(c);
  // Drive so that the mirror emitter sees Omega_eff = 20 gamma.
  c.drive_amplitude *= 20.0 * unit.params.gamma_photon / unit.params.rabi_effective();
  const LindbladModel mirror = build_cavity_model(c);
  const LindbladModel free = build_free_space_model(c);
  hygiene.add_steady(mirror);
  hygiene.add_steady(free);
  const LindbladModel* both[] = {&mirror, &free};
  const TauGrid grid = choose_tau_grid(both);
  const SpectrumResult sm = rf_spectrum(g1_dressed(mirror, grid));
  const SpectrumResult sf = rf_spectrum(g1_dressed(free, grid));
  if (sm.mollow_peaks.size() != 3 || sf.mollow_peaks.size() != 3) {
    return {false, "expected three Mollow peaks, found " + std::to_string(sm.mollow_peaks.size()) + " and " +
                       std::to_string(sf.mollow_peaks.size())};
  }
  double worst_bins = 0.0;
  for (const auto* pair : {&sm, &sf}) {
    const double w = (pair == &sm ? mirror : free).params.rabi_effective();
    worst_bins = std::max({worst_bins, std::abs(pair->mollow_peaks[0].position + w) / pair->frequency_bin,
                           std::abs(pair->mollow_peaks[2].position - w) / pair->frequency_bin});
  }
  const double split_m = 0.5 * (sm.mollow_peaks[2].position - sm.mollow_peaks[0].position);
  const double split_f = 0.5 * (sf.mollow_peaks[2].position - sf.mollow_peaks[0].position);
  const double expected = std::abs(mirror.params.rabi_bare) / std::abs(free.params.rabi_bare);
  const double ratio_err = std::abs(split_m / split_f / expected - 1.0);
  return {worst_bins <= 1.0 && ratio_err <= 0.02,
          "sidebands off +-Omega_eff by at most " + fmt(worst_bins) + " bins (tol 1); splitting ratio " +
              fmt(split_m / split_f) + " vs |Omega_cav/Omega_free| " + fmt(expected) + ", error " +
              fmt(100.0 * ratio_err) + "% (tol 2%)"};
}

Outcome sideband_fraction() {
  PhysicalConfig c;
  const LindbladModel m = build_cavity_model(c);
  hygiene.add_steady(m);
  const SpectrumResult s = rf_spectrum(g1_dressed(m, choose_tau_grid(m)));
  const double b = m.params.franck_condon;
  const double err = std::abs(s.sideband_fraction - (1.0 - b * b));

  // ln <B>^2 is proportional to alpha at fixed cutoff and temperature.
  PhysicalConfig tuned = c;
  tuned.env.alpha = c.env.alpha * std::log(0.84) / std::log(b * b);
  const LindbladModel mt = build_cavity_model(tuned);
  hygiene.add_steady(mt);
  const double bt = mt.params.franck_condon;
  const SpectrumResult st = rf_spectrum(g1_dressed(mt, choose_tau_grid(mt)));
  const bool ok = err <= 0.02 && std::abs(bt * bt - 0.84) <= 1e-10 && std::abs(st.sideband_fraction - 0.16) <= 0.02;
  return {ok, "default bath: sideband " + fmt(s.sideband_fraction) + " vs 1 - <B>^2 = " + fmt(1.0 - b * b) +
                  " (tol 0.02); alpha = " + fmt(tuned.env.alpha) + " gives <B>^2 = " + fmt(bt * bt) + ", sideband " +
                  fmt(st.sideband_fraction) + " (target 0.16 +- 0.02)"};
}

Outcome coherent_fraction() {
  RunConfig cfg;
  const CsvDocument d = run_command(Command::fraction, cfg).document;
  const double b2 = std::pow(franck_condon(cfg.physical.env), 2);
  const auto& first = d.rows.front();
  const bool bare_ok = first[3] >= 0.99 && first[4] >= 0.99;
  const double plateau = std::max(std::abs(first[1] - b2), std::abs(first[2] - b2));
  bool monotone = true;
  double gap = 0.0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    gap = std::max({gap, std::abs(d.rows[i][1] - d.rows[i][2]), std::abs(d.rows[i][3] - d.rows[i][4])});
    if (i > 0) {
      for (std::size_t k = 1; k <= 4; ++k) monotone &= d.rows[i][k] < d.rows[i - 1][k];
    }
  }
  for (double ratio : {0.1, 1.0, 10.0}) {
    hygiene.add_steady(model_at_rabi_ratio(cfg.physical, SweepModel::mirror, ratio));
  }
  return {bare_ok && plateau <= 0.02 && monotone && gap <= 0.05,
          "phonon-free at 0.1: " + fmt(first[3]) + ", " + fmt(first[4]) + " (>= 0.99); phonon plateau off <B>^2 by " +
              fmt(plateau) + " (tol 0.02); monotone " + (monotone ? "yes" : "no") + "; mirror/free gap " + fmt(gap) +
              " (tol 0.05)"};
}

Outcome numerical_hygiene() {
  RunConfig dyn;
  dyn.physical.drive_amplitude = 0.3;
  dyn.physical.env.temperature = 4.0;
  for (ModelKind k : {ModelKind::cavity, ModelKind::free_space, ModelKind::image}) {
    dyn.model = k;
    const LindbladModel m = k == ModelKind::cavity       ? build_cavity_model(dyn.physical)
                            : k == ModelKind::free_space ? build_free_space_model(dyn.physical)
                                                         : build_image_model(dyn.physical, true);
    std::vector<double> t(2001);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 10.0 / m.params.gamma_photon * i / 2000.0;
    hygiene.add(evolve(m.liouvillian, DensityMatrix::basis_state(m.dim(), m.ground_index()), t).stats);
  }

  RunConfig small;
  small.sweep.points = 3;
  small.steps = 200;
  bool identical = true;
  for (Command c : {Command::rates, Command::dynamics, Command::equivalence, Command::fraction}) {
    small.threads = 1;
    const std::string a = to_csv(run_command(c, small).document);
    small.threads = 3;
    const std::string b = to_csv(run_command(c, small).document);
    identical &= a == b;
  }
  const Hygiene& h = hygiene;
  const bool ok = h.max_trace_error <= 1e-10 && h.max_hermiticity_error <= 1e-10 && h.min_eigenvalue >= -1e-7 &&
                  h.max_steady_residual <= 1e-12 && identical;
  return {ok, std::to_string(h.trajectories) + " trajectories, " + std::to_string(h.steady_states) +
                  " steady states: trace " + fmt(h.max_trace_error) + ", Hermiticity " + fmt(h.max_hermiticity_error) +
                  ", min eigenvalue " + fmt(h.min_eigenvalue) + ", steady residual " + fmt(h.max_steady_residual) +
                  "; repeated CSV " + (identical ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"model equivalence", model_equivalence},
      {"surface-modified rate and shift", surface_rates},
      {"phonon rate properties", phonon_rate_properties},
      {"Franck-Condon identities", franck_condon_identities},
      {"Mollow sideband positions", mollow_structure},
      {"phonon sideband fraction", sideband_fraction},
      {"coherent fraction curves", coherent_fraction},
      {"numerical hygiene", numerical_hygiene},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
