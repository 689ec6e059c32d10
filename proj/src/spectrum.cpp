#include "msim/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "msim/errors.hpp"

namespace msim {

using cplx = std::complex<double>;

namespace {

constexpr double kTailTolerance = 1e-6;
constexpr double kDecayLengths = 18.0;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double total_decay_rate(const ModelParameters& p) {
  return p.gamma_photon + p.phonon.gamma_down + p.phonon.gamma_up;
}

// Slowest nonzero relaxation rate of the generator.
double slowest_rate(const LindbladModel& m) {
  Eigen::ComplexEigenSolver<Matrix> eig(m.liouvillian.matrix(), false);
  const auto& ev = eig.eigenvalues();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev[i]));
  double slowest = std::numeric_limits<double>::infinity();
  bool skipped_zero = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!skipped_zero && std::abs(ev[i]) <= 1e-10 * scale) {
      skipped_zero = true;
      continue;
    }
    slowest = std::min(slowest, std::abs(ev[i].real()));
  }
  return slowest;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

double band_value(const SpectrumResult& r, double omega) {
  const double bin = r.frequency_bin;
  const double first = r.omega.front();
  const auto i = static_cast<std::ptrdiff_t>(std::llround((omega - first) / bin));
  const auto clamped = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(r.omega.size()) - 1);
  return r.s_incoherent[static_cast<std::size_t>(clamped)];
}

}  // namespace

double TauGrid::frequency_bin() const { return 2.0 * std::numbers::pi / (dt * static_cast<double>(n)); }

TauGrid choose_tau_grid(std::span<const LindbladModel* const> models) {
  if (models.empty()) throw InvalidArgument("choose_tau_grid needs at least one model");
  double dt = std::numeric_limits<double>::infinity();
  double tau_needed = 0.0;
  for (const LindbladModel* m : models) {
    const ModelParameters& p = m->params;
    const double gamma = total_decay_rate(p);
    dt = std::min(dt, 0.05 / p.env.omega_c);
    if (p.rabi_effective() > 0.0) dt = std::min(dt, 0.02 / p.rabi_effective());
    dt = std::min(dt, 0.05 / gamma);
    const double rate = slowest_rate(*m);
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw NonConvergence("model has an undamped mode; the correlation function never settles");
    }
    tau_needed = std::max({tau_needed, 10.0 / gamma, 100.0 / p.env.omega_c, kDecayLengths / rate});
  }
  TauGrid g;
  g.dt = dt;
  const auto samples = static_cast<std::size_t>(std::ceil(tau_needed / dt)) + 1;
  g.n = std::bit_ceil(samples);
  return g;
}

TauGrid choose_tau_grid(const LindbladModel& model) {
  const LindbladModel* one[] = {&model};
  return choose_tau_grid(std::span<const LindbladModel* const>(one));
}

CorrelationSeries g1_dressed(const LindbladModel& model, const TauGrid& grid,
                             const std::optional<DensityMatrix>& initial) {
  if (grid.n < 2 || !(grid.dt > 0.0)) throw InvalidArgument("g1_dressed needs a lag grid with at least two samples");
  const DensityMatrix rho = initial ? *initial : steady_state(model.liouvillian);
  const Operator lower = model.lowering();
  const Operator raise = lower.adjoint();

  std::vector<double> taus(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) taus[k] = grid.dt * static_cast<double>(k);
  const std::vector<cplx> g = two_time_correlation(model.liouvillian, raise, lower, rho, taus);

  const double b2 = model.params.franck_condon * model.params.franck_condon;
  const PhiTable table(model.params.env, grid.dt, grid.n);
  CorrelationSeries out;
  out.dt = grid.dt;
  out.values.resize(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) out.values[k] = b2 * std::exp(table[k]) * g[k];
  if (!initial) out.asymptote = b2 * expectation(raise, rho) * expectation(lower, rho);
  out.zpl_halfwidth = zpl_halfwidth(model);
  return out;
}

SpectrumResult rf_spectrum(const CorrelationSeries& g1) {
  const std::size_t n = g1.values.size();
  if (n < 4 || n % 2 != 0) throw InvalidArgument("rf_spectrum needs an even number of samples (at least 4)");
  const double g0 = g1.values[0].real();
  if (!(g0 > 0.0)) throw InvalidArgument("rf_spectrum: g1(0) is zero, the emitter does not emit");

  SpectrumResult r;
  r.tail_residual = std::abs(g1.values.back() - g1.asymptote) / g0;
  if (r.tail_residual > kTailTolerance) {
    std::ostringstream msg;
    msg << "correlation has not settled by tau_max = " << g1.dt * static_cast<double>(n - 1)
        << " ps: |g1 - g1(inf)| / g1(0) = " << r.tail_residual << " (needs < " << kTailTolerance << ")";
    throw NonConvergence(msg.str());
  }

  FftwBuffer buf(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const cplx x = (g1.values[k] - g1.asymptote) * (k == 0 ? 0.5 : 1.0);
    buf.data[k][0] = x.real();
    buf.data[k][1] = x.imag();
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  r.frequency_bin = 2.0 * std::numbers::pi / (g1.dt * static_cast<double>(n));
  r.omega.resize(n);
  r.s_incoherent.resize(n);
  const double scale = g1.dt / std::numbers::pi / g0;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::ptrdiff_t m = -half; m < half; ++m) {
    const auto out = static_cast<std::size_t>(m + half);
    const auto src = static_cast<std::size_t>(m < 0 ? m + static_cast<std::ptrdiff_t>(n) : m);
    r.omega[out] = r.frequency_bin * static_cast<double>(m);
    r.s_incoherent[out] = scale * buf.data[src][0];
  }

  r.coherent_weight = g1.asymptote.real() / g0;
  double total = 0.0;
  for (double s : r.s_incoherent) total += s;
  r.incoherent_weight = total * r.frequency_bin;

  // Sideband: everything outside the zero-phonon region plus the continuum
  // underneath it, taken as the straight line between the region's edges.
  r.zpl_halfwidth = g1.zpl_halfwidth;
  const double w = g1.zpl_halfwidth;
  if (w > 0.0 && w < r.omega.back()) {
    double outside = 0.0;
    std::size_t inside_bins = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(r.omega[i]) > w) outside += r.s_incoherent[i];
      else ++inside_bins;
    }
    const double baseline = 0.5 * (band_value(r, -w) + band_value(r, w));
    r.sideband_fraction = (outside + baseline * static_cast<double>(inside_bins)) * r.frequency_bin;
  }
  r.mollow_peaks = mollow_features(r);
  return r;
}

std::vector<MollowPeak> mollow_features(const SpectrumResult& r) {
  std::vector<MollowPeak> peaks;
  const std::size_t n = r.s_incoherent.size();
  if (n < 3) return peaks;
  const double w = r.zpl_halfwidth > 0.0 ? r.zpl_halfwidth : std::numeric_limits<double>::infinity();
  const auto& s = r.s_incoherent;
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(r.omega[i]) <= w) top = std::max(top, s[i]);
  }
  if (!(top > 0.0)) return peaks;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (std::abs(r.omega[i]) > w) continue;
    if (s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > 1e-3 * top) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  if (candidates.size() > 3) candidates.resize(3);

  for (std::size_t i : candidates) {
    const double ym = s[i - 1], y0 = s[i], yp = s[i + 1];
    const double curv = ym - 2.0 * y0 + yp;
    const double shift = curv != 0.0 ? 0.5 * (ym - yp) / curv : 0.0;
    MollowPeak p;
    p.position = r.omega[i] + shift * r.frequency_bin;
    p.height = y0 - 0.25 * (ym - yp) * shift;
    const double half = 0.5 * p.height;
    std::size_t lo = i;
    while (lo > 0 && s[lo] > half) --lo;
    std::size_t hi = i;
    while (hi + 1 < n && s[hi] > half) ++hi;
    const auto cross = [&](std::size_t a, std::size_t b) {
      const double t = (half - s[a]) / (s[b] - s[a]);
      return r.omega[a] + t * (r.omega[b] - r.omega[a]);
    };
    if (s[lo] <= half && s[hi] <= half) p.fwhm = cross(hi - 1, hi) - cross(lo + 1, lo);
    peaks.push_back(p);
  }
  std::sort(peaks.begin(), peaks.end(), [](const MollowPeak& a, const MollowPeak& b) { return a.position < b.position; });
  return peaks;
}

double zpl_halfwidth(const LindbladModel& model) {
  const ModelParameters& p = model.params;
  return std::max(6.0 * (p.rabi_effective() + total_decay_rate(p)), 0.1 * p.env.omega_c);
}

double saturation_rabi(const LindbladModel& model) { return model.params.gamma_photon / std::numbers::sqrt2; }

LindbladModel model_at_rabi_ratio(const PhysicalConfig& config, SweepModel which, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw InvalidArgument("Rabi ratio must be finite and > 0");
  config.validate();
  const bool mirror = which == SweepModel::mirror;
  const double gamma = mirror ? modified_se_rate(config.gamma0, config.geometry) : config.gamma0;
  const double per_unit = mirror ? std::abs(standing_wave_rabi(1.0, config.geometry, config.laser_wavenumber())) : 1.0;
  if (!(per_unit > 0.0)) throw InvalidArgument("emitter sits at a node of the standing wave; no drive reaches it");
  const double b = franck_condon(config.env);
  PhysicalConfig c = config;
  c.drive_amplitude = ratio * (gamma / std::numbers::sqrt2) / (b * per_unit);
  return mirror ? build_cavity_model(c) : build_free_space_model(c);
}

std::vector<CoherentFractionPoint> coherent_fraction_sweep(const PhysicalConfig& config, SweepModel which,
                                                           std::span<const double> rabi_ratios) {
  std::vector<CoherentFractionPoint> out;
  out.reserve(rabi_ratios.size());
  for (double ratio : rabi_ratios) {
    const LindbladModel m = model_at_rabi_ratio(config, which, ratio);
    const SpectrumResult s = rf_spectrum(g1_dressed(m, choose_tau_grid(m)));
    CoherentFractionPoint p;
    p.rabi_ratio = m.params.rabi_effective() / saturation_rabi(m);
    p.drive_amplitude = m.params.drive_amplitude;
    p.fraction = s.coherent_weight / (s.coherent_weight + s.incoherent_weight);
    p.franck_condon = m.params.franck_condon;
    out.push_back(p);
  }
  return out;
}

}  // namespace msim
