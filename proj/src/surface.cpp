#include "msim/surface.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "msim/errors.hpp"

namespace msim {

namespace {

// Below this pair phase the closed forms lose digits to cancellation between
// the 1/y, 1/y^2 and 1/y^3 terms, so the Taylor series is summed instead.
constexpr double kSeriesBelow = 1.0;

// (3/2) sum_m (-1)^(m+1) (2m+2)^2 y^(2m) / (2m+3)!
double f_image_series(double y) {
  const double y2 = y * y;
  double fact = 6.0;  // (2m+3)! at m = 0
  double pow = 1.0;
  double sum = 0.0;
  for (int m = 0; m < 30; ++m) {
    const double k = 2.0 * m + 2.0;
    const double term = (m % 2 == 0 ? -1.0 : 1.0) * k * k * pow / fact;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pow *= y2;
    fact *= (2.0 * m + 4.0) * (2.0 * m + 5.0);
  }
  return 1.5 * sum;
}

// 3 sum_m (-1)^m (2m+2) y^(2m) / (2m+3)!
double f_perp_series(double y) {
  const double y2 = y * y;
  double fact = 6.0;
  double pow = 1.0;
  double sum = 0.0;
  for (int m = 0; m < 30; ++m) {
    const double term = (m % 2 == 0 ? 1.0 : -1.0) * (2.0 * m + 2.0) * pow / fact;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pow *= y2;
    fact *= (2.0 * m + 4.0) * (2.0 * m + 5.0);
  }
  return 3.0 * sum;
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << ": argument must be finite and >= 0, got " << v;
    throw InvalidArgument(msg.str());
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << ": argument must be finite and > 0, got " << v;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

std::string_view orientation_name(Orientation o) {
  return o == Orientation::parallel ? "parallel" : "perpendicular";
}

Orientation parse_orientation(std::string_view s) {
  if (s == "parallel") return Orientation::parallel;
  if (s == "perpendicular") return Orientation::perpendicular;
  throw InvalidArgument("orientation must be 'parallel' or 'perpendicular', got '" + std::string(s) + "'");
}

void Geometry::validate() const {
  if (!(r_d_nm >= 0.0) || !std::isfinite(r_d_nm)) {
    throw InvalidArgument("geometry.r_d_nm must be finite and >= 0");
  }
  if (!(lambda0_nm > 0.0) || !std::isfinite(lambda0_nm)) {
    throw InvalidArgument("geometry.lambda0_nm must be finite and > 0");
  }
  if (!(refractive_index > 0.0) || !std::isfinite(refractive_index)) {
    throw InvalidArgument("geometry.refractive_index must be finite and > 0");
  }
}

double Geometry::q0() const { return 2.0 * std::numbers::pi * refractive_index / lambda0_nm; }

double f_image(double y) {
  require_nonnegative(y, "f_image");
  if (y < kSeriesBelow) return f_image_series(y);
  const double s = std::sin(y), c = std::cos(y);
  return 1.5 * (-s / y - c / (y * y) + s / (y * y * y));
}

double g_image(double y) {
  require_positive(y, "g_image");
  const double s = std::sin(y), c = std::cos(y);
  return 1.5 * (-s / (y * y) - c / (y * y * y) + c / y);
}

double f_parallel(double x) {
  require_nonnegative(x, "f_parallel");
  return f_image(2.0 * x);
}

double g_parallel(double x) {
  require_positive(x, "g_parallel");
  return g_image(2.0 * x);
}

double f_perpendicular(double y) {
  require_nonnegative(y, "f_perpendicular");
  if (y < kSeriesBelow) return f_perp_series(y);
  const double s = std::sin(y), c = std::cos(y);
  return 3.0 * (-c / (y * y) + s / (y * y * y));
}

double g_perpendicular(double y) {
  require_positive(y, "g_perpendicular");
  const double s = std::sin(y), c = std::cos(y);
  return -3.0 * (s / (y * y) + c / (y * y * y));
}

double surface_f(const Geometry& g) {
  g.validate();
  const double x = g.phase();
  return g.orientation == Orientation::parallel ? f_parallel(x) : f_perpendicular(2.0 * x);
}

double surface_g(const Geometry& g) {
  g.validate();
  if (g.r_d_nm == 0.0) throw InvalidArgument("surface shift diverges at r_d = 0");
  const double x = g.phase();
  return g.orientation == Orientation::parallel ? g_parallel(x) : g_perpendicular(2.0 * x);
}

double modified_se_rate(double gamma0, const Geometry& g) {
  require_nonnegative(gamma0, "modified_se_rate");
  // 1 + f can come out a few ulps below zero right at the mirror.
  return std::max(0.0, (1.0 + surface_f(g)) * gamma0);
}

double surface_shift(double gamma0, const Geometry& g) {
  require_nonnegative(gamma0, "surface_shift");
  return 0.5 * surface_g(g) * gamma0;
}

std::complex<double> standing_wave_rabi(double drive_amplitude, const Geometry& g, double q_l) {
  g.validate();
  if (g.orientation == Orientation::perpendicular) return {0.0, 0.0};
  // incident e^{-i q z} plus the pi-shifted reflection e^{+i q z}
  return std::complex<double>(0.0, -2.0 * drive_amplitude * std::sin(q_l * g.r_d_nm));
}

std::pair<std::complex<double>, std::complex<double>> image_rabi_frequencies(
    double drive_amplitude, const Geometry& g, double q_l) {
  g.validate();
  if (g.orientation == Orientation::perpendicular) return {{0.0, 0.0}, {0.0, 0.0}};
  const double amp = drive_amplitude / std::numbers::sqrt2;
  const auto site = [&](double z, double projection) {
    const std::complex<double> in = std::polar(1.0, -q_l * z);
    const std::complex<double> out = std::polar(1.0, q_l * z);
    return amp * projection * (in - out);
  };
  return {site(g.r_d_nm, 1.0), site(-g.r_d_nm, -1.0)};
}

SurfaceFactors surface_factors(double gamma0, double drive_amplitude, const Geometry& g, double q_l) {
  SurfaceFactors out;
  out.f = surface_f(g);
  out.g = surface_g(g);
  out.gamma_modified = modified_se_rate(gamma0, g);
  out.shift = surface_shift(gamma0, g);
  out.rabi_eff = standing_wave_rabi(drive_amplitude, g, q_l);
  return out;
}

}  // namespace msim
