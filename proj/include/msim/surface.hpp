#pragma once

// Mirror-modified radiative properties of a point dipole in front of a
// perfectly conducting plane: rate modification F, frequency shift G and the
// standing-wave drive.
//
// Phase arguments: the parallel functions take x = q0 r_d, the perpendicular
// and image-pair functions take the pair phase y = q0 * (2 r_d).

#include <complex>
#include <string_view>
#include <utility>

namespace msim {

enum class Orientation { parallel, perpendicular };

std::string_view orientation_name(Orientation o);
Orientation parse_orientation(std::string_view s);

struct Geometry {
  double r_d_nm = 177.0;
  double lambda0_nm = 950.0;
  double refractive_index = 3.5;
  Orientation orientation = Orientation::parallel;

  /// Throws InvalidArgument on negative distance or non-positive wavelength/index.
  void validate() const;
  /// In-medium emission wavenumber 2 pi n / lambda0, rad/nm.
  double q0() const;
  /// q0 r_d
  double phase() const { return q0() * r_d_nm; }
  /// Real-to-image separation, 2 r_d.
  double image_separation_nm() const { return 2.0 * r_d_nm; }
};

double f_parallel(double x);
double g_parallel(double x);
double f_perpendicular(double y);
double g_perpendicular(double y);

/// Cross-coupling functions of a dipole and its antiparallel image at pair
/// phase y. They coincide with f_parallel(y/2) and g_parallel(y/2).
double f_image(double y);
double g_image(double y);

/// Rate and shift factors for the configured orientation.
double surface_f(const Geometry& g);
double surface_g(const Geometry& g);

double modified_se_rate(double gamma0, const Geometry& g);
double surface_shift(double gamma0, const Geometry& g);

/// Rabi frequency of the emitter in the incident-plus-reflected field at normal
/// incidence. drive_amplitude is the free-space Rabi frequency 2 d E0.
std::complex<double> standing_wave_rabi(double drive_amplitude, const Geometry& g, double q_l);

/// Rabi frequencies of the real dipole (z = +r_d) and its image (z = -r_d)
/// when each sees only the incident wave of the unfolded problem.
std::pair<std::complex<double>, std::complex<double>> image_rabi_frequencies(
    double drive_amplitude, const Geometry& g, double q_l);

struct SurfaceFactors {
  double f = 0.0;
  double g = 0.0;
  double gamma_modified = 0.0;
  double shift = 0.0;
  std::complex<double> rabi_eff{};
};

SurfaceFactors surface_factors(double gamma0, double drive_amplitude, const Geometry& g, double q_l);

}  // namespace msim
