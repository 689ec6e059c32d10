#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "msim/errors.hpp"
#include "msim/kernels/kernels.hpp"
#include "msim/spectrum.hpp"

using namespace msim;

namespace {

std::size_t nearest_bin(const SpectrumResult& r, double w) {
  const auto it = std::min_element(r.omega.begin(), r.omega.end(),
                                   [&](double a, double b) { return std::abs(a - w) < std::abs(b - w); });
  return static_cast<std::size_t>(it - r.omega.begin());
}

}  // namespace

TEST_CASE("lag grid") {
  MESSAGE("kernels: " << kernels::isa_name(kernels::active().isa));
  const LindbladModel m = build_cavity_model(PhysicalConfig{});
  const TauGrid g = choose_tau_grid(m);
  CHECK(std::has_single_bit(g.n));
  CHECK(g.dt <= 0.05 / m.params.env.omega_c);
  CHECK(g.tau_max() >= 10.0 / m.params.gamma_photon);
  CHECK(g.frequency_bin() == doctest::Approx(2.0 * std::numbers::pi / (g.dt * g.n)));
}

TEST_CASE("undriven emitter gives a single Lorentzian at its detuning") {
  PhysicalConfig c;
  c.env.alpha = 0.0;
  c.drive_amplitude = 0.0;
  c.detuning = 0.01;
  const LindbladModel m = build_free_space_model(c);
  const double gamma = m.params.gamma_photon;
  const TauGrid grid = choose_tau_grid(m);
  const SpectrumResult r = rf_spectrum(g1_dressed(m, grid, DensityMatrix::basis_state(2, 1)));
  CHECK(r.coherent_weight == 0.0);
  CHECK(r.incoherent_weight == doctest::Approx(1.0).epsilon(1e-9));

  double worst = 0.0;
  for (double off : {-5.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0}) {
    const std::size_t i = nearest_bin(r, c.detuning.value() + off * gamma);
    const double w = r.omega[i] - c.detuning.value();
    const double exact = (0.5 * gamma / std::numbers::pi) / (w * w + 0.25 * gamma * gamma);
    worst = std::max(worst, std::abs(r.s_incoherent[i] - exact) / exact);
  }
  CHECK(worst < 1e-4);
  REQUIRE(r.mollow_peaks.size() == 1);
  CHECK(std::abs(r.mollow_peaks[0].position - 0.01) < r.frequency_bin);
  CHECK(r.mollow_peaks[0].fwhm == doctest::Approx(gamma).epsilon(0.05));
}

TEST_CASE("weak-drive coherent fraction without phonons") {
  PhysicalConfig c;
  c.env.alpha = 0.0;
  for (double ratio : {0.3, 1.0, 3.0}) {
    const LindbladModel m = model_at_rabi_ratio(c, SweepModel::free_space, ratio);
    CHECK(m.params.rabi_effective() / saturation_rabi(m) == doctest::Approx(ratio).epsilon(1e-12));
    const SpectrumResult r = rf_spectrum(g1_dressed(m, choose_tau_grid(m)));
    const double s = 2.0 * std::pow(m.params.rabi_effective() / m.params.gamma_photon, 2);
    CHECK(r.coherent_weight + r.incoherent_weight == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.coherent_weight == doctest::Approx(1.0 / (1.0 + s)).epsilon(1e-8));
  }
}

TEST_CASE("strong drive splits the line into a Mollow triplet") {
  PhysicalConfig c;
  c.env.alpha = 0.0;
  c.drive_amplitude = 40.0 * c.gamma0;
  const LindbladModel m = build_free_space_model(c);
  const SpectrumResult r = rf_spectrum(g1_dressed(m, choose_tau_grid(m)));
  REQUIRE(r.mollow_peaks.size() == 3);
  const double w = m.params.rabi_effective();
  CHECK(std::abs(r.mollow_peaks[0].position + w) < r.frequency_bin);
  CHECK(std::abs(r.mollow_peaks[1].position) < r.frequency_bin);
  CHECK(std::abs(r.mollow_peaks[2].position - w) < r.frequency_bin);
  // Sidebands have width 3 gamma / 2 and a third of the central height.
  CHECK(r.mollow_peaks[0].fwhm == doctest::Approx(1.5 * c.gamma0).epsilon(0.05));
  CHECK(r.mollow_peaks[1].fwhm == doctest::Approx(c.gamma0).epsilon(0.05));
  CHECK(r.mollow_peaks[2].height / r.mollow_peaks[1].height == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("phonon sideband carries 1 - <B>^2 of the emission") {
  PhysicalConfig c;
  const LindbladModel m = build_cavity_model(c);
  const SpectrumResult r = rf_spectrum(g1_dressed(m, choose_tau_grid(m)));
  const double b = m.params.franck_condon;
  CHECK(r.coherent_weight + r.incoherent_weight == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(r.sideband_fraction - (1.0 - b * b)) < 1e-3);
  CHECK(r.tail_residual < 1e-6);
  CHECK(std::is_sorted(r.omega.begin(), r.omega.end()));
}

TEST_CASE("correlations that have not settled are rejected") {
  CorrelationSeries g;
  g.dt = 0.1;
  g.values.assign(64, std::complex<double>(1.0, 0.0));
  CHECK_THROWS_AS(rf_spectrum(g), NonConvergence);
  g.values.resize(63);
  CHECK_THROWS_AS(rf_spectrum(g), InvalidArgument);
  g.values.assign(64, std::complex<double>(0.0));
  CHECK_THROWS_AS(rf_spectrum(g), InvalidArgument);
}

TEST_CASE("sweep reaches the requested Rabi ratios") {
  PhysicalConfig c;
  const double ratios[] = {0.5, 2.0};
  const auto pts = coherent_fraction_sweep(c, SweepModel::mirror, ratios);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].rabi_ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pts[1].rabi_ratio == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pts[0].fraction > pts[1].fraction);
  CHECK_THROWS_AS(model_at_rabi_ratio(c, SweepModel::mirror, 0.0), InvalidArgument);
}
