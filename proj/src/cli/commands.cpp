#include "msim/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include "msim/cli/parallel.hpp"
#include "msim/errors.hpp"
#include "msim/spectrum.hpp"

namespace msim::cli {

namespace {

std::string kv(const std::string& key, double v) { return key + " = " + format_number(v); }

CommandResult with_header(Command c, const RunConfig& cfg, std::vector<std::string> columns) {
  CommandResult r;
  r.document.header = config_header(c, cfg);
  r.document.columns = std::move(columns);
  return r;
}

LindbladModel build_model(const RunConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::cavity: return build_cavity_model(cfg.physical);
    case ModelKind::free_space: return build_free_space_model(cfg.physical);
    case ModelKind::image: return build_image_model(cfg.physical, cfg.selection_rules);
  }
  throw InvalidArgument("unknown model kind");
}

double default_t_max(const LindbladModel& m) {
  const double gamma = m.params.gamma_photon;
  if (!(gamma > 0.0)) {
    throw InvalidArgument("dynamics.t_max_ps = auto needs a nonzero radiative rate; set it explicitly");
  }
  return 10.0 / gamma;
}

std::vector<double> uniform_times(double t_max, std::size_t steps) {
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = t_max * static_cast<double>(k) / static_cast<double>(steps);
  return t;
}

// Rows of the spectrum to print: symmetric about the laser frequency, inside
// |omega| <= omega_max, thinned by a common stride to at most max_rows.
std::vector<std::size_t> spectrum_rows(const std::vector<double>& omega, double omega_max, std::size_t max_rows) {
  std::size_t centre = 0;
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (std::abs(omega[i]) < std::abs(omega[centre])) centre = i;
  }
  std::size_t half = 0;
  while (centre >= half + 1 && centre + half + 1 < omega.size() && std::abs(omega[centre - half - 1]) <= omega_max &&
         std::abs(omega[centre + half + 1]) <= omega_max) {
    ++half;
  }
  const std::size_t max_half = (max_rows - 1) / 2;
  const std::size_t stride = half <= max_half ? 1 : (half + max_half - 1) / max_half;
  std::vector<std::size_t> rows;
  for (std::size_t k = half / stride; k > 0; --k) rows.push_back(centre - k * stride);
  rows.push_back(centre);
  for (std::size_t k = 1; k <= half / stride; ++k) rows.push_back(centre + k * stride);
  return rows;
}

void spectrum_footer(std::vector<std::string>& out, const std::string& name, const LindbladModel& m,
                     const SpectrumResult& s) {
  const double b = m.params.franck_condon;
  out.push_back(kv(name + ".gamma_per_ps", m.params.gamma_photon));
  out.push_back(kv(name + ".rabi_effective", m.params.rabi_effective()));
  out.push_back(kv(name + ".franck_condon", b));
  out.push_back(kv(name + ".coherent_weight", s.coherent_weight));
  out.push_back(kv(name + ".incoherent_weight", s.incoherent_weight));
  out.push_back(kv(name + ".sideband_fraction", s.sideband_fraction));
  out.push_back(kv(name + ".one_minus_b2", 1.0 - b * b));
  out.push_back(kv(name + ".zpl_halfwidth", s.zpl_halfwidth));
  out.push_back(kv(name + ".frequency_bin", s.frequency_bin));
  out.push_back(kv(name + ".tail_residual", s.tail_residual));
  for (std::size_t i = 0; i < s.mollow_peaks.size(); ++i) {
    const MollowPeak& p = s.mollow_peaks[i];
    std::ostringstream line;
    line << name << ".peak" << i << " = " << format_number(p.position) << ", " << format_number(p.height) << ", "
         << format_number(p.fwhm);
    out.push_back(line.str());
  }
}

}  // namespace

std::vector<std::string> config_header(Command c, const RunConfig& cfg) {
  std::vector<std::string> out;
  out.push_back("mirror_sim " + std::string(command_name(c)));
  for (const auto& [key, value] : describe(cfg, c)) {
    if (key == "threads" || key == "output") continue;
    out.push_back(key + " = " + value);
  }
  return out;
}

CommandResult cmd_rates(const RunConfig& cfg) {
  const ResolvedSweep sweep = cfg.resolved_sweep(Command::rates);
  CommandResult r = with_header(Command::rates, cfg,
                                {"r_over_lambda", "gamma_ratio_par", "shift_ratio_par", "gamma_ratio_perp",
                                 "shift_ratio_perp"});
  const std::vector<double> u = sweep.values();
  const auto rows = parallel_map(u.size(), resolve_threads(cfg), [&](std::size_t i) {
    Geometry par = cfg.physical.geometry;
    par.r_d_nm = u[i] * par.lambda0_nm;
    par.orientation = Orientation::parallel;
    Geometry perp = par;
    perp.orientation = Orientation::perpendicular;
    return std::vector<double>{u[i], modified_se_rate(1.0, par), 2.0 * surface_shift(1.0, par),
                               modified_se_rate(1.0, perp), 2.0 * surface_shift(1.0, perp)};
  });
  for (const auto& row : rows) r.document.add_row(row);
  return r;
}

CommandResult cmd_dynamics(const RunConfig& cfg) {
  const LindbladModel m = build_model(cfg);
  const int d = m.dim();
  std::vector<std::string> cols{"t_ps"};
  for (int i = 0; i < d; ++i) cols.push_back("pop_" + m.basis_labels[i]);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      cols.push_back("re_rho_" + m.basis_labels[i] + m.basis_labels[j]);
      cols.push_back("im_rho_" + m.basis_labels[i] + m.basis_labels[j]);
    }
  }
  cols.push_back("trace");
  cols.push_back("min_eig");
  CommandResult r = with_header(Command::dynamics, cfg, std::move(cols));

  const double t_max = cfg.t_max_ps.value_or(default_t_max(m));
  const int start = cfg.initial == InitialState::excited ? m.excited_index() : m.ground_index();
  const Trajectory traj = evolve(m.liouvillian, DensityMatrix::basis_state(d, start), uniform_times(t_max, cfg.steps));

  std::size_t clipped = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const DensityMatrix& rho = traj.states[k];
    std::vector<double> row{traj.times[k]};
    for (int i = 0; i < d; ++i) {
      const double p = rho(i, i).real();
      if (p < 0.0) ++clipped;
      row.push_back(std::max(p, 0.0));
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        row.push_back(rho(i, j).real());
        row.push_back(rho(i, j).imag());
      }
    }
    row.push_back(rho.matrix().trace().real());
    row.push_back(rho.min_eigenvalue());
    r.document.add_row(std::move(row));
  }
  const TrajectoryStats& st = traj.stats;
  r.document.footer = {kv("t_max_ps", t_max),
                       "integrator_steps = " + std::to_string(st.steps),
                       "rejected_steps = " + std::to_string(st.rejected_steps),
                       kv("max_trace_error", st.max_trace_error),
                       kv("max_hermiticity_error", st.max_hermiticity_error),
                       kv("min_eigenvalue", st.min_eigenvalue),
                       "positivity_warnings = " + std::to_string(st.positivity_warnings),
                       "clipped_populations = " + std::to_string(clipped)};
  if (st.positivity_warnings > 0) {
    r.warnings.push_back(std::to_string(st.positivity_warnings) +
                         " states had eigenvalues in [-1e-7, -1e-9); populations are clipped at 0 in the output only");
  }
  return r;
}

CommandResult cmd_spectrum(const RunConfig& cfg) {
  const std::array<LindbladModel, 2> models{build_cavity_model(cfg.physical), build_free_space_model(cfg.physical)};
  const LindbladModel* ptrs[2] = {&models[0], &models[1]};
  const TauGrid grid = choose_tau_grid(ptrs);
  const bool undriven = cfg.physical.drive_amplitude == 0.0;
  const auto spectra = parallel_map(2, resolve_threads(cfg), [&](std::size_t i) {
    std::optional<DensityMatrix> initial;
    if (undriven) initial = DensityMatrix::basis_state(2, models[i].excited_index());
    return rf_spectrum(g1_dressed(models[i], grid, initial));
  });

  CommandResult r = with_header(Command::spectrum, cfg, {"omega", "s_mirror", "s_free"});
  r.document.header.push_back(kv("grid.dt_ps", grid.dt));
  r.document.header.push_back("grid.samples = " + std::to_string(grid.n));
  r.document.header.push_back(undriven ? "state = transient decay from |X>" : "state = steady state");
  for (std::size_t i : spectrum_rows(spectra[0].omega, cfg.spectrum_omega_max, cfg.spectrum_max_rows)) {
    r.document.add_row({spectra[0].omega[i], spectra[0].s_incoherent[i], spectra[1].s_incoherent[i]});
  }
  spectrum_footer(r.document.footer, "mirror", models[0], spectra[0]);
  spectrum_footer(r.document.footer, "free", models[1], spectra[1]);
  return r;
}

CommandResult cmd_fraction(const RunConfig& cfg) {
  const ResolvedSweep sweep = cfg.resolved_sweep(Command::fraction);
  const std::vector<double> ratios = sweep.values();
  PhysicalConfig bare = cfg.physical;
  bare.env.alpha = 0.0;
  struct Curve {
    const PhysicalConfig* config;
    SweepModel model;
  };
  const std::array<Curve, 4> curves{Curve{&cfg.physical, SweepModel::mirror}, Curve{&cfg.physical, SweepModel::free_space},
                                    Curve{&bare, SweepModel::mirror}, Curve{&bare, SweepModel::free_space}};
  const std::size_t n = ratios.size();
  const auto points = parallel_map(4 * n, resolve_threads(cfg), [&](std::size_t task) {
    const Curve& c = curves[task / n];
    const double ratio = ratios[task % n];
    return coherent_fraction_sweep(*c.config, c.model, std::span<const double>(&ratio, 1)).front();
  });

  CommandResult r = with_header(Command::fraction, cfg,
                                {"rabi_ratio", "mirror_phonon", "free_phonon", "mirror_no_phonon", "free_no_phonon",
                                 "drive_mirror", "drive_free"});
  for (std::size_t i = 0; i < n; ++i) {
    r.document.add_row({ratios[i], points[i].fraction, points[n + i].fraction, points[2 * n + i].fraction,
                        points[3 * n + i].fraction, points[i].drive_amplitude, points[n + i].drive_amplitude});
  }
  const double b = points.front().franck_condon;
  r.document.footer = {kv("franck_condon", b), kv("b2", b * b)};
  return r;
}

CommandResult cmd_equivalence(const RunConfig& cfg) {
  double t_max = 0.0;
  if (cfg.t_max_ps) {
    t_max = *cfg.t_max_ps;
  } else {
    t_max = default_t_max(build_cavity_model(cfg.physical));
  }
  const EquivalenceReport rep = equivalence_report(cfg.physical, t_max, cfg.steps, cfg.selection_rules, cfg.initial);
  CommandResult r = with_header(Command::equivalence, cfg,
                                {"max_deviation", "max_leakage", "t_max_ps", "steps", "cavity_min_eigenvalue",
                                 "image_min_eigenvalue", "cavity_max_trace_error", "image_max_trace_error"});
  r.document.add_row({rep.max_deviation, rep.max_leakage, rep.t_max, static_cast<double>(rep.steps),
                      rep.cavity_stats.min_eigenvalue, rep.image_stats.min_eigenvalue,
                      rep.cavity_stats.max_trace_error, rep.image_stats.max_trace_error});
  const bool dev_ok = rep.max_deviation <= kEquivalenceDeviation;
  const bool leak_ok = rep.max_leakage <= kEquivalenceLeakage;
  r.document.footer.push_back(std::string("result = ") + (dev_ok && leak_ok ? "PASS" : "FAIL"));
  if (!dev_ok) {
    r.document.footer.push_back("deviation " + format_number(rep.max_deviation) + " exceeds " +
                                format_number(kEquivalenceDeviation));
  }
  if (!leak_ok) {
    r.document.footer.push_back("population left the {|g>,|s>} subspace: max leakage " +
                                format_number(rep.max_leakage) + " exceeds " + format_number(kEquivalenceLeakage));
  }
  if (!(dev_ok && leak_ok)) r.exit_code = kExitEquivalence;
  return r;
}

CommandResult run_command(Command c, const RunConfig& cfg) {
  cfg.validate();
  switch (c) {
    case Command::rates: return cmd_rates(cfg);
    case Command::dynamics: return cmd_dynamics(cfg);
    case Command::spectrum: return cmd_spectrum(cfg);
    case Command::fraction: return cmd_fraction(cfg);
    case Command::equivalence: return cmd_equivalence(cfg);
  }
  throw InvalidArgument("unknown command");
}

}  // namespace msim::cli
