#pragma once

// Polaron-frame master equations for the emitter near the mirror.
//
//   cavity     two-level {|0>, |X>} with mirror-modified rate, shift and drive
//   free_space two-level reference with bare rate and the free-space drive
//   image      four-level {|g>, |a>, |s>, |e>} of the dipole plus its image

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "msim/phonon.hpp"
#include "msim/quantum.hpp"
#include "msim/surface.hpp"

namespace msim {

enum class RateArgument { detuning, dressed };

std::string_view rate_argument_name(RateArgument r);
RateArgument parse_rate_argument(std::string_view s);

struct PhysicalConfig {
  Geometry geometry;
  double gamma0 = 0.001;  ///< bare radiative rate, 1/ps
  /// Bare laser detuning omega0 - omega_l in rad/ps. Empty means "on resonance
  /// with the dressed transition", i.e. delta' + V = 0 for the model being built.
  std::optional<double> detuning;
  double drive_amplitude = 0.01;  ///< free-space Rabi frequency 2 d E0, rad/ps
  /// Laser wavenumber in rad/nm; empty means q0.
  std::optional<double> q_l;
  PhononEnvironment env;
  RateArgument rate_argument = RateArgument::detuning;
  /// Photon absorption channels allowed; applies the corresponding image-model truncation.
  bool photon_thermal = false;

  void validate() const;
  double laser_wavenumber() const { return q_l.value_or(geometry.q0()); }
};

enum class ModelKind { cavity, free_space, image };

std::string_view model_kind_name(ModelKind k);

/// Derived quantities a model was built from.
struct ModelParameters {
  double franck_condon = 1.0;        ///< <B>
  double drive_amplitude = 0.0;      ///< free-space Rabi frequency the model was built with
  std::complex<double> rabi_bare{};  ///< Omega_cav, the free-space drive, or Omega_sg
  std::complex<double> rabi_pn{};    ///< <B> * rabi_bare
  std::complex<double> rabi_antisymmetric{};
  double gamma_photon = 0.0;   ///< decay rate of the emitting transition
  double gamma_cross = 0.0;    ///< image-pair cross rate (image model only)
  double surface_shift = 0.0;  ///< V, rad/ps
  double delta = 0.0;          ///< bare detuning used
  double delta_prime = 0.0;    ///< delta - polaron shift
  double rate_argument = 0.0;  ///< w' fed to the phonon rates
  PhononRates phonon;
  PhononEnvironment env;

  /// Laser detuning from the dressed emitting transition, delta' + V.
  double laser_detuning() const { return delta_prime + surface_shift; }
  /// |Omega_pn|
  double rabi_effective() const { return std::abs(rabi_pn); }
};

struct LindbladModel {
  ModelKind kind = ModelKind::cavity;
  bool selection_rules = false;
  Operator hamiltonian = Operator::zero(2);
  std::vector<Channel> channels;
  std::vector<std::string> basis_labels;
  Superoperator liouvillian = Superoperator::zero(2);
  ModelParameters params;

  int dim() const { return hamiltonian.dim(); }
  /// Lowering operator of the emitting transition: |0><X| or |g><s|.
  Operator lowering() const;
  /// Index of the ground and emitting excited level in the basis.
  int ground_index() const { return 0; }
  int excited_index() const { return kind == ModelKind::image ? 2 : 1; }
};

/// Basis indices of the image model.
namespace image_basis {
inline constexpr int g = 0, a = 1, s = 2, e = 3;
}

LindbladModel build_cavity_model(const PhysicalConfig& config);
/// The same emitter without the mirror, driven with the free-space Rabi frequency.
LindbladModel build_free_space_model(const PhysicalConfig& config);
LindbladModel build_image_model(const PhysicalConfig& config, bool selection_rules);

/// Largest |rho_ij| outside the {|g>,|s>} block over a trajectory.
double subspace_leakage(const Trajectory& traj);

/// Projects an image-model trajectory onto {|g>,|s>}, relabelled {|0>,|X>}.
/// Throws LeakageError when the discarded part exceeds 1e-10.
Trajectory reduce_to_subspace(const Trajectory& traj, const LindbladModel& model);

enum class InitialState { ground, excited };

struct EquivalenceReport {
  double max_deviation = 0.0;  ///< max |rho_cavity - P rho_image P| over time and entries
  double max_leakage = 0.0;
  double t_max = 0.0;
  std::size_t steps = 0;
  TrajectoryStats cavity_stats;
  TrajectoryStats image_stats;
};

/// Evolves both models from the same initial state on a uniform grid of
/// `steps` intervals over [0, t_max] and compares them elementwise.
EquivalenceReport equivalence_report(const PhysicalConfig& config, double t_max, std::size_t steps,
                                     bool selection_rules = true,
                                     InitialState initial = InitialState::ground);

}  // namespace msim
