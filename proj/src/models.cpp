#include "msim/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "msim/errors.hpp"

namespace msim {

namespace {

using cplx = std::complex<double>;

struct Dressing {
  double franck_condon;
  double polaron_shift;
  double delta;
  double delta_prime;
};

Dressing dress(const PhysicalConfig& c, double surface_shift) {
  Dressing d;
  d.franck_condon = franck_condon(c.env);
  d.polaron_shift = polaron_shift(c.env);
  d.delta = c.detuning.value_or(d.polaron_shift - surface_shift);
  d.delta_prime = d.delta - d.polaron_shift;
  return d;
}

double rate_argument_value(const PhysicalConfig& c, double laser_detuning, cplx rabi_pn, double delta_prime) {
  if (c.rate_argument == RateArgument::dressed) return std::hypot(laser_detuning, std::abs(rabi_pn));
  return delta_prime;
}

PhononRates rates_for(const PhysicalConfig& c, cplx rabi_pn, double omega_prime, double shift) {
  if (c.env.alpha == 0.0 || rabi_pn == 0.0) {
    PhononRates r;
    r.polaron_shift = shift;
    return r;
  }
  return phonon_rates(rabi_pn, rate_integrals(omega_prime, c.env), shift);
}

void add_phonon_channels(std::vector<Channel>& ch, const PhononRates& r, const Operator& lower) {
  const Operator raise = lower.adjoint();
  ch.push_back({r.gamma_down, ChannelKind::lindblad, lower, "phonon-assisted emission"});
  ch.push_back({r.gamma_up, ChannelKind::lindblad, raise, "phonon-assisted absorption"});
  ch.push_back({-r.gamma_cd_down, ChannelKind::cross_dephasing, lower, "cross-dephasing (lowering)"});
  ch.push_back({-r.gamma_cd_up, ChannelKind::cross_dephasing, raise, "cross-dephasing (raising)"});
}

LindbladModel build_two_level(const PhysicalConfig& c, ModelKind kind, double gamma, double shift, cplx rabi) {
  const Dressing d = dress(c, shift);
  LindbladModel m;
  m.kind = kind;
  m.basis_labels = {"0", "X"};
  ModelParameters& p = m.params;
  p.franck_condon = d.franck_condon;
  p.drive_amplitude = c.drive_amplitude;
  p.rabi_bare = rabi;
  p.rabi_pn = d.franck_condon * rabi;
  p.gamma_photon = gamma;
  p.surface_shift = shift;
  p.delta = d.delta;
  p.delta_prime = d.delta_prime;
  p.env = c.env;
  p.rate_argument = rate_argument_value(c, p.laser_detuning(), p.rabi_pn, d.delta_prime);
  p.phonon = rates_for(c, p.rabi_pn, p.rate_argument, d.polaron_shift);

  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = d.delta_prime + shift;
  h(0, 1) = 0.5 * std::conj(p.rabi_pn);
  h(1, 0) = 0.5 * p.rabi_pn;
  m.hamiltonian = Operator(h);

  const Operator lower = Operator::transition(2, 0, 1);
  m.channels.push_back({gamma, ChannelKind::lindblad, lower, "photon emission"});
  add_phonon_channels(m.channels, p.phonon, lower);
  m.liouvillian = assemble_liouvillian(m.hamiltonian, m.channels);
  return m;
}

}  // namespace

std::string_view rate_argument_name(RateArgument r) { return r == RateArgument::dressed ? "dressed" : "detuning"; }

RateArgument parse_rate_argument(std::string_view s) {
  if (s == "detuning") return RateArgument::detuning;
  if (s == "dressed") return RateArgument::dressed;
  throw InvalidArgument("phonon.rate_argument must be 'detuning' or 'dressed', got '" + std::string(s) + "'");
}

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::cavity: return "cavity";
    case ModelKind::free_space: return "free_space";
    case ModelKind::image: return "image";
  }
  return "?";
}

void PhysicalConfig::validate() const {
  geometry.validate();
  env.validate();
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw InvalidArgument("emitter.gamma0_per_ps must be finite and > 0");
  if (!(drive_amplitude >= 0.0) || !std::isfinite(drive_amplitude)) {
    throw InvalidArgument("drive.amplitude must be finite and >= 0");
  }
  if (detuning && !std::isfinite(*detuning)) throw InvalidArgument("drive.detuning must be finite");
  if (q_l && (!(*q_l > 0.0) || !std::isfinite(*q_l))) throw InvalidArgument("drive.q_l_per_nm must be finite and > 0");
}

Operator LindbladModel::lowering() const {
  return Operator::transition(dim(), ground_index(), excited_index());
}

LindbladModel build_cavity_model(const PhysicalConfig& config) {
  config.validate();
  const double gamma = modified_se_rate(config.gamma0, config.geometry);
  const double shift = surface_shift(config.gamma0, config.geometry);
  const cplx rabi = standing_wave_rabi(config.drive_amplitude, config.geometry, config.laser_wavenumber());
  return build_two_level(config, ModelKind::cavity, gamma, shift, rabi);
}

LindbladModel build_free_space_model(const PhysicalConfig& config) {
  config.validate();
  return build_two_level(config, ModelKind::free_space, config.gamma0, 0.0, cplx(config.drive_amplitude, 0.0));
}

LindbladModel build_image_model(const PhysicalConfig& config, bool selection_rules) {
  config.validate();
  using namespace image_basis;
  const Geometry& geo = config.geometry;
  if (geo.r_d_nm == 0.0) throw InvalidArgument("image model needs r_d > 0 (dipole-image shift diverges)");
  const double y = geo.q0() * geo.image_separation_nm();
  const bool par = geo.orientation == Orientation::parallel;
  const double f12 = par ? f_image(y) : f_perpendicular(y);
  const double g12 = par ? g_image(y) : g_perpendicular(y);
  const double v12 = 0.5 * g12 * config.gamma0;
  const auto [rabi1, rabi2] = image_rabi_frequencies(config.drive_amplitude, geo, config.laser_wavenumber());
  const cplx rabi_s = (rabi1 + rabi2) / std::numbers::sqrt2;
  const cplx rabi_a = (rabi1 - rabi2) / std::numbers::sqrt2;

  const Dressing d = dress(config, v12);
  LindbladModel m;
  m.kind = ModelKind::image;
  m.selection_rules = selection_rules;
  m.basis_labels = {"g", "a", "s", "e"};
  ModelParameters& p = m.params;
  p.franck_condon = d.franck_condon;
  p.drive_amplitude = config.drive_amplitude;
  p.rabi_bare = rabi_s;
  p.rabi_pn = d.franck_condon * rabi_s;
  p.rabi_antisymmetric = d.franck_condon * rabi_a;
  p.gamma_photon = (1.0 + f12) * config.gamma0;
  p.gamma_cross = f12 * config.gamma0;
  p.surface_shift = v12;
  p.delta = d.delta;
  p.delta_prime = d.delta_prime;
  p.env = config.env;
  p.rate_argument = rate_argument_value(config, p.laser_detuning(), p.rabi_pn, d.delta_prime);
  p.phonon = rates_for(config, p.rabi_pn, p.rate_argument, d.polaron_shift);

  Matrix h = Matrix::Zero(4, 4);
  h(s, s) = d.delta_prime + v12;
  h(a, a) = d.delta_prime - v12;
  h(e, e) = 2.0 * d.delta_prime;
  h(s, g) = 0.5 * p.rabi_pn;
  if (!selection_rules) h(e, s) = 0.5 * p.rabi_pn;
  h(a, g) = -0.5 * p.rabi_antisymmetric;
  h(e, a) = 0.5 * p.rabi_antisymmetric;
  h(g, s) = std::conj(h(s, g));
  h(s, e) = std::conj(h(e, s));
  h(g, a) = std::conj(h(a, g));
  h(a, e) = std::conj(h(e, a));
  m.hamiltonian = Operator(h);

  const Operator s_gs = Operator::transition(4, g, s);
  const Operator s_full = s_gs + Operator::transition(4, s, e);
  const Operator a_full = Operator::transition(4, a, e) - Operator::transition(4, g, a);
  const bool truncate = selection_rules || config.photon_thermal;

  m.channels.push_back({p.gamma_photon, ChannelKind::lindblad, truncate ? s_gs : s_full, "photon emission (symmetric)"});
  if (!truncate) {
    m.channels.push_back({(1.0 - f12) * config.gamma0, ChannelKind::lindblad, a_full, "photon emission (antisymmetric)"});
  }
  add_phonon_channels(m.channels, p.phonon, selection_rules ? s_gs : s_full);
  m.liouvillian = assemble_liouvillian(m.hamiltonian, m.channels);
  return m;
}

double subspace_leakage(const Trajectory& traj) {
  using namespace image_basis;
  double leak = 0.0;
  for (const DensityMatrix& rho : traj.states) {
    if (rho.dim() != 4) throw InvalidArgument("subspace_leakage expects four-level states");
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const bool inside = (i == g || i == s) && (j == g || j == s);
        if (!inside) leak = std::max(leak, std::abs(rho(i, j)));
      }
    }
  }
  return leak;
}

Trajectory reduce_to_subspace(const Trajectory& traj, const LindbladModel& model) {
  using namespace image_basis;
  if (model.kind != ModelKind::image) throw InvalidArgument("reduce_to_subspace needs an image model");
  if (!model.selection_rules) throw InvalidArgument("reduce_to_subspace needs selection rules enabled");
  const double leak = subspace_leakage(traj);
  if (leak > 1e-10) {
    std::ostringstream msg;
    msg << "population left the {g, s} subspace: max |rho| outside the block = " << leak;
    throw LeakageError(msg.str(), leak);
  }
  Trajectory out;
  out.times = traj.times;
  out.states.reserve(traj.states.size());
  for (const DensityMatrix& rho : traj.states) {
    Matrix r(2, 2);
    r << rho(g, g), rho(g, s), rho(s, g), rho(s, s);
    DensityMatrix reduced = DensityMatrix::unchecked(std::move(r));
    out.stats.max_trace_error = std::max(out.stats.max_trace_error, reduced.trace_error());
    out.stats.max_hermiticity_error = std::max(out.stats.max_hermiticity_error, reduced.hermiticity_error());
    out.stats.min_eigenvalue = std::min(out.stats.min_eigenvalue, reduced.min_eigenvalue());
    out.states.push_back(std::move(reduced));
  }
  out.stats.steps = traj.stats.steps;
  out.stats.rejected_steps = traj.stats.rejected_steps;
  out.stats.positivity_warnings = traj.stats.positivity_warnings;
  return out;
}

EquivalenceReport equivalence_report(const PhysicalConfig& config, double t_max, std::size_t steps,
                                     bool selection_rules, InitialState initial) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("equivalence t_max must be > 0");
  if (steps == 0) throw InvalidArgument("equivalence needs at least one step");
  using namespace image_basis;
  const LindbladModel cavity = build_cavity_model(config);
  const LindbladModel image = build_image_model(config, selection_rules);

  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = t_max * static_cast<double>(k) / static_cast<double>(steps);
  const bool excited = initial == InitialState::excited;
  const Trajectory tc = evolve(cavity.liouvillian, DensityMatrix::basis_state(2, excited ? 1 : 0), times);
  const Trajectory ti = evolve(image.liouvillian, DensityMatrix::basis_state(4, excited ? s : g), times);

  EquivalenceReport rep;
  rep.t_max = t_max;
  rep.steps = steps;
  rep.cavity_stats = tc.stats;
  rep.image_stats = ti.stats;
  rep.max_leakage = subspace_leakage(ti);
  const int map[2] = {g, s};
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        rep.max_deviation = std::max(rep.max_deviation, std::abs(tc.states[k](i, j) - ti.states[k](map[i], map[j])));
      }
    }
  }
  return rep;
}

}  // namespace msim
