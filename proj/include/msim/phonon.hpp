#pragma once

// Polaron-frame phonon quantities for a super-ohmic bath
// J(w) = alpha w^3 exp(-w^2 / wc^2).
//
// Units: hbar = 1, frequencies in rad/ps, times in ps, alpha in ps^2.

#include <complex>
#include <cstddef>
#include <vector>

namespace msim {

/// k_B / hbar in rad ps^-1 K^-1, from the exact SI values
/// k_B = 1.380649e-23 J/K and hbar = 1.054571817e-34 J s, times 1e-12 s/ps.
inline constexpr double kBoltzmannOverHbar = 1.380649e-23 / 1.054571817e-34 * 1e-12;

struct PhononEnvironment {
  double alpha = 0.03;        ///< ps^2
  double omega_c = 2.2;       ///< rad/ps
  double temperature = 10.0;  ///< K

  void validate() const;
  /// hbar / (k_B T) in ps; +inf at T = 0.
  double beta() const;
  /// Upper integration limit for all frequency integrals; J is e^-64 smaller there.
  double omega_max() const { return 8.0 * omega_c; }
};

double spectral_density(double omega, const PhononEnvironment& env);

/// <B> = exp(-1/2 int J/w^2 coth(beta w / 2) dw)
double franck_condon(const PhononEnvironment& env);

/// phi(tau) = int J/w^2 [coth(beta w / 2) cos(w tau) - i sin(w tau)] dw
std::complex<double> phi(double tau, const PhononEnvironment& env);

/// int J/w dw, subtracted from the bare detuning.
double polaron_shift(const PhononEnvironment& env);

/// Drive-independent part of the scattering rates at rate argument w':
///   down = int e^{+i w' t} (e^{phi} - 1) dt,  up = same with -w',
///   cd   = int cos(w' t) (1 - e^{-phi}) dt,
/// all over the full real line.
struct RateIntegrals {
  double down = 0.0;
  double up = 0.0;
  double cd = 0.0;
  double tau_max = 0.0;  ///< truncation actually used, ps
};

/// Throws NonConvergence if the bath correlation has not decayed below 1e-12
/// by 480/omega_c, which happens at and very near zero temperature.
RateIntegrals rate_integrals(double omega_prime, const PhononEnvironment& env);

struct PhononRates {
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  std::complex<double> gamma_cd_down{};
  std::complex<double> gamma_cd_up{};
  double polaron_shift = 0.0;
};

PhononRates phonon_rates(std::complex<double> omega_pn, const RateIntegrals& k, double shift);
PhononRates phonon_rates(std::complex<double> omega_pn, double omega_prime, const PhononEnvironment& env);

/// phi sampled on the uniform grid tau_k = k dt. Beyond the point where phi has
/// decayed to rounding level the table stores exact zeros. Immutable once built.
class PhiTable {
 public:
  PhiTable(const PhononEnvironment& env, double dt, std::size_t n);

  std::size_t size() const { return n_; }
  double dt() const { return dt_; }
  /// phi(k dt), or 0 past the decayed region.
  std::complex<double> operator[](std::size_t k) const {
    return k < values_.size() ? values_[k] : std::complex<double>{};
  }
  /// Number of explicitly computed samples.
  std::size_t computed() const { return values_.size(); }

 private:
  double dt_;
  std::size_t n_;
  std::vector<std::complex<double>> values_;
};

}  // namespace msim
