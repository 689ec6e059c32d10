#include "msim/phonon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "msim/errors.hpp"
#include "msim/kernels/kernels.hpp"
#include "msim/quadrature.hpp"

namespace msim {

using cplx = std::complex<double>;

namespace {

constexpr quadrature::Tolerance kOmegaTol{1e-15, 1e-13, 200000};
constexpr quadrature::Tolerance kTauTol{1e-13, 1e-11, 200000};
constexpr double kRateTail = 1e-12;
constexpr int kMaxTauDoublings = 3;

// omega * coth(beta omega / 2), finite as omega -> 0 and exact at T = 0.
double omega_coth(double omega, double beta) {
  if (std::isinf(beta)) return omega;
  const double u = 0.5 * beta * omega;
  if (u < 1e-4) return (2.0 / beta) * (1.0 + u * u / 3.0);
  return omega / std::tanh(u);
}

double envelope(double omega, const PhononEnvironment& env) {
  const double r = omega / env.omega_c;
  return env.alpha * std::exp(-r * r);
}

// e^z - 1 without cancellation for small |z|
cplx expm1(cplx z) {
  const double em1 = std::expm1(z.real());
  const double s = std::sin(0.5 * z.imag());
  return {em1 * std::cos(z.imag()) - 2.0 * s * s, (em1 + 1.0) * std::sin(z.imag())};
}

std::size_t oscillation_panels(double omega_max, double tau) {
  return static_cast<std::size_t>(std::ceil(omega_max * std::abs(tau) / std::numbers::pi)) + 1;
}

}  // namespace

void PhononEnvironment::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("phonon.alpha_ps2 must be finite and >= 0");
  if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw InvalidArgument("phonon.omega_c must be finite and > 0");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("phonon.temperature_k must be finite and >= 0");
  }
}

double PhononEnvironment::beta() const {
  if (temperature == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (kBoltzmannOverHbar * temperature);
}

double spectral_density(double omega, const PhononEnvironment& env) {
  if (!(omega >= 0.0)) throw InvalidArgument("spectral_density: frequency must be >= 0");
  return envelope(omega, env) * omega * omega * omega;
}

double franck_condon(const PhononEnvironment& env) {
  env.validate();
  if (env.alpha == 0.0) return 1.0;
  const double beta = env.beta();
  const auto f = [&](double w) { return envelope(w, env) * omega_coth(w, beta); };
  const auto r = quadrature::integrate<double>(f, 0.0, env.omega_max(), kOmegaTol);
  return std::exp(-0.5 * r.value);
}

cplx phi(double tau, const PhononEnvironment& env) {
  env.validate();
  if (!std::isfinite(tau)) throw InvalidArgument("phi: tau must be finite");
  if (env.alpha == 0.0) return {0.0, 0.0};
  const double beta = env.beta();
  const auto f = [&](double w) {
    const double e = envelope(w, env);
    return cplx(e * omega_coth(w, beta) * std::cos(w * tau), -e * w * std::sin(w * tau));
  };
  const std::size_t panels = oscillation_panels(env.omega_max(), tau);
  quadrature::Tolerance tol = kOmegaTol;
  tol.max_intervals += panels;
  return quadrature::integrate<cplx>(f, 0.0, env.omega_max(), tol, panels).value;
}

double polaron_shift(const PhononEnvironment& env) {
  env.validate();
  if (env.alpha == 0.0) return 0.0;
  const auto f = [&](double w) { return envelope(w, env) * w * w; };
  return quadrature::integrate<double>(f, 0.0, env.omega_max(), kOmegaTol).value;
}

RateIntegrals rate_integrals(double omega_prime, const PhononEnvironment& env) {
  env.validate();
  if (!std::isfinite(omega_prime)) throw InvalidArgument("phonon rate argument must be finite");
  RateIntegrals out;
  if (env.alpha == 0.0) return out;

  double tau_max = 60.0 / env.omega_c;
  double tail = 0.0;
  for (int attempt = 0;; ++attempt) {
    tail = 0.0;
    for (double frac : {0.9, 0.95, 1.0}) {
      const cplx p = phi(frac * tau_max, env);
      tail = std::max({tail, std::abs(expm1(p)), std::abs(expm1(-p))});
    }
    if (tail < kRateTail) break;
    if (attempt == kMaxTauDoublings) {
      std::ostringstream msg;
      msg << "phonon correlation has not decayed by tau = " << tau_max << " ps (|e^phi - 1| = " << tail
          << ", T = " << env.temperature << " K); rates need a finite temperature";
      throw NonConvergence(msg.str());
    }
    tau_max *= 2.0;
  }

  // The full-line integrals fold onto [0, inf) because phi(-t) = conj(phi(t)).
  const auto f = [&](double t) {
    const cplx p = phi(t, env);
    const cplx e = expm1(p);
    const cplx rot = std::polar(1.0, omega_prime * t);
    const cplx cd = -expm1(-p);
    return std::array<double, 3>{2.0 * (rot * e).real(), 2.0 * (std::conj(rot) * e).real(),
                                 2.0 * rot.real() * cd.real()};
  };
  const std::size_t panels = static_cast<std::size_t>(
      std::ceil(tau_max * (std::abs(omega_prime) + env.omega_c) / std::numbers::pi)) + 1;
  const auto r = quadrature::integrate<std::array<double, 3>>(f, 0.0, tau_max, kTauTol, panels);
  out.down = r.value[0];
  out.up = r.value[1];
  out.cd = r.value[2];
  out.tau_max = tau_max;
  return out;
}

PhononRates phonon_rates(cplx omega_pn, const RateIntegrals& k, double shift) {
  PhononRates r;
  const double mag2 = std::norm(omega_pn);
  r.gamma_down = 0.25 * mag2 * k.down;
  r.gamma_up = 0.25 * mag2 * k.up;
  r.gamma_cd_down = 0.25 * std::conj(omega_pn) * std::conj(omega_pn) * k.cd;
  r.gamma_cd_up = 0.25 * omega_pn * omega_pn * k.cd;
  r.polaron_shift = shift;
  return r;
}

PhononRates phonon_rates(cplx omega_pn, double omega_prime, const PhononEnvironment& env) {
  if (env.alpha == 0.0 || omega_pn == 0.0) {
    env.validate();
    PhononRates r;
    r.polaron_shift = polaron_shift(env);
    return r;
  }
  return phonon_rates(omega_pn, rate_integrals(omega_prime, env), polaron_shift(env));
}

PhiTable::PhiTable(const PhononEnvironment& env, double dt, std::size_t n) : dt_(dt), n_(n) {
  env.validate();
  if (!(dt > 0.0) || n == 0) throw InvalidArgument("PhiTable needs dt > 0 and at least one sample");
  if (env.alpha == 0.0) return;

  // Find where phi has decayed to rounding level relative to phi(0).
  const double phi0 = std::abs(phi(0.0, env));
  const double tau_end = dt * static_cast<double>(n - 1);
  double tau_cut = 30.0 / env.omega_c;
  for (int attempt = 0;; ++attempt) {
    if (tau_cut >= tau_end) {
      tau_cut = tau_end;
      break;
    }
    double tail = 0.0;
    for (double frac : {0.9, 0.95, 1.0}) tail = std::max(tail, std::abs(phi(frac * tau_cut, env)));
    if (tail < 1e-13 * phi0) break;
    if (attempt == 4) {
      std::ostringstream msg;
      msg << "phonon propagator has not decayed by tau = " << tau_cut << " ps (|phi| = " << tail
          << ", T = " << env.temperature << " K)";
      throw NonConvergence(msg.str());
    }
    tau_cut *= 2.0;
  }
  const std::size_t count = std::min(n, static_cast<std::size_t>(std::ceil(tau_cut / dt)) + 1);

  // Composite 16-point Gauss-Legendre in omega, fine enough that each panel
  // spans less than half an oscillation of cos(omega tau) up to tau_cut.
  using Rule = boost::math::quadrature::gauss<double, 16>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const std::size_t panels = oscillation_panels(env.omega_max(), tau_cut);
  const double width = env.omega_max() / static_cast<double>(panels);
  const double beta = env.beta();
  std::vector<double> omega, a, b;
  omega.reserve(panels * 16);
  a.reserve(panels * 16);
  b.reserve(panels * 16);
  const auto add_node = [&](double w, double weight) {
    const double e = envelope(w, env) * weight;
    omega.push_back(w);
    a.push_back(e * omega_coth(w, beta));
    b.push_back(e * w);
  };
  for (std::size_t p = 0; p < panels; ++p) {
    const double center = width * (static_cast<double>(p) + 0.5);
    const double half = 0.5 * width;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] == 0.0) {
        add_node(center, half * ws[j]);
      } else {
        add_node(center - half * xs[j], half * ws[j]);
        add_node(center + half * xs[j], half * ws[j]);
      }
    }
  }

  const std::size_t m = omega.size();
  std::vector<cplx> z(m), rot(m);
  for (std::size_t i = 0; i < m; ++i) rot[i] = std::polar(1.0, omega[i] * dt);
  const auto& kernel = kernels::active();
  constexpr std::size_t kReseed = 64;
  values_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (k % kReseed == 0) {
      const double tau = dt * static_cast<double>(k);
      for (std::size_t i = 0; i < m; ++i) z[i] = std::polar(1.0, omega[i] * tau);
    }
    const auto s = kernel.oscillator_step(m, a.data(), b.data(), z.data(), rot.data());
    values_[k] = cplx(s.cos_sum, -s.sin_sum);
  }
}

}  // namespace msim
