#pragma once

// Resonance fluorescence of a polaron-dressed emitter.
//
// g1(tau) = <B>^2 e^{phi(tau)} <sigma+(tau) sigma-(0)> is sampled on a uniform
// lag grid and transformed as S(w) = Re int_0^inf (g1 - g1(inf)) e^{-i w tau} dtau / pi.
// Frequencies are measured from the laser, so emission at the bare transition
// of an undriven emitter detuned by Delta appears at w = +Delta.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "msim/models.hpp"

namespace msim {

struct TauGrid {
  double dt = 0.0;
  std::size_t n = 0;  ///< number of samples, tau_k = k dt for k < n
  double tau_max() const { return dt * static_cast<double>(n - 1); }
  double frequency_bin() const;
};

/// Uniform lag grid resolving the phonon memory, the drive period and the
/// radiative lifetime of every model given, and long enough for the slowest
/// Liouvillian mode to decay. n is a power of two.
TauGrid choose_tau_grid(std::span<const LindbladModel* const> models);
TauGrid choose_tau_grid(const LindbladModel& model);

struct CorrelationSeries {
  double dt = 0.0;
  std::vector<std::complex<double>> values;
  std::complex<double> asymptote{};  ///< lim tau->inf g1, zero for transient emission
  double zpl_halfwidth = 0.0;        ///< integration half-width of the zero-phonon region, rad/ps
};

/// Steady-state dressed correlation. When `initial` is given (e.g. an excited
/// state with no drive) the correlation is taken from that state instead and
/// the asymptote is zero.
CorrelationSeries g1_dressed(const LindbladModel& model, const TauGrid& grid,
                             const std::optional<DensityMatrix>& initial = std::nullopt);

struct MollowPeak {
  double position = 0.0;  ///< rad/ps from the laser
  double height = 0.0;
  double fwhm = 0.0;
};

struct SpectrumResult {
  std::vector<double> omega;         ///< ascending, rad/ps from the laser
  std::vector<double> s_incoherent;  ///< per rad/ps, normalized to the total emission
  double coherent_weight = 0.0;
  double incoherent_weight = 0.0;  ///< integral of s_incoherent
  double sideband_fraction = 0.0;
  double frequency_bin = 0.0;
  double zpl_halfwidth = 0.0;
  double tail_residual = 0.0;  ///< |g1(tau_max) - g1(inf)| / g1(0)
  std::vector<MollowPeak> mollow_peaks;
};

/// Throws NonConvergence when the series has not settled to within 1e-6 g1(0)
/// of its asymptote by the last sample.
SpectrumResult rf_spectrum(const CorrelationSeries& g1);

/// Up to three strongest local maxima inside the zero-phonon region, ordered by
/// position, with parabolic-vertex positions and interpolated FWHMs.
std::vector<MollowPeak> mollow_features(const SpectrumResult& result);

/// Half-width of the zero-phonon region: wide enough for the Mollow triplet and
/// its Lorentzian wings, narrow against the phonon sideband.
double zpl_halfwidth(const LindbladModel& model);

/// Saturation Rabi frequency gamma / sqrt(2) of a model.
double saturation_rabi(const LindbladModel& model);

struct CoherentFractionPoint {
  double rabi_ratio = 0.0;  ///< Omega_eff / Omega_s
  double drive_amplitude = 0.0;
  double fraction = 0.0;
  double franck_condon = 1.0;
};

enum class SweepModel { mirror, free_space };

/// Coherent fraction at each requested Omega_eff / Omega_s, adjusting the
/// drive amplitude of the chosen model to hit each target.
std::vector<CoherentFractionPoint> coherent_fraction_sweep(const PhysicalConfig& config, SweepModel which,
                                                           std::span<const double> rabi_ratios);

/// Model with its drive amplitude set so that Omega_eff / Omega_s = ratio.
LindbladModel model_at_rabi_ratio(const PhysicalConfig& config, SweepModel which, double ratio);

}  // namespace msim
