#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//
// The value type V may be a scalar (double, std::complex<double>) or a small
// fixed-size bundle such as std::array<double, N>, so several integrals that
// share an expensive integrand can be refined together. The error of a bundle
// is the largest component error.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <type_traits>
#include <vector>

#include "msim/errors.hpp"

namespace msim::quadrature {

struct Tolerance {
  double abs = 1e-14;
  double rel = 1e-12;
  std::size_t max_intervals = 4000;
};

template <class V>
struct Result {
  V value{};
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }
template <std::size_t N>
double magnitude(const std::array<double, N>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class V>
V zero_like() {
  return V{};
}

template <class V>
V scaled(const V& v, double s) {
  if constexpr (std::is_arithmetic_v<V> || std::is_same_v<V, std::complex<double>>) {
    return v * s;
  } else {
    V out = v;
    for (auto& x : out) x *= s;
    return out;
  }
}

template <class V>
void accumulate(V& acc, const V& v, double w) {
  if constexpr (std::is_arithmetic_v<V> || std::is_same_v<V, std::complex<double>>) {
    acc += w * v;
  } else {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
  }
}

template <class V>
V difference(const V& a, const V& b) {
  if constexpr (std::is_arithmetic_v<V> || std::is_same_v<V, std::complex<double>>) {
    return a - b;
  } else {
    V out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
  }
}

// Kronrod abscissae on [0,1] (symmetric), index 1,3,5 are also Gauss nodes.
inline constexpr std::array<double, 8> kXk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Segment {
  double a;
  double b;
  V value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class V, class F>
Segment<V> kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  V fc = f(center);
  V kron = scaled(fc, kWk[7]);
  V gauss = scaled(fc, kWg[3]);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXk[j];
    const V f1 = f(center - dx);
    const V f2 = f(center + dx);
    accumulate(kron, f1, kWk[j]);
    accumulate(kron, f2, kWk[j]);
    if (j % 2 == 1) {
      accumulate(gauss, f1, kWg[j / 2]);
      accumulate(gauss, f2, kWg[j / 2]);
    }
  }
  kron = scaled(kron, half);
  gauss = scaled(gauss, half);
  return {a, b, kron, magnitude(difference(kron, gauss))};
}

}  // namespace detail

/// Integrates f over [a, b]. The interval is first cut into `initial_panels`
/// equal pieces, which helps oscillatory integrands, then the worst segment is
/// bisected until the summed error estimate meets tolerance.
/// Throws NonConvergence if max_intervals is exhausted first.
template <class V, class F>
Result<V> integrate(F&& f, double a, double b, const Tolerance& tol = {},
                    std::size_t initial_panels = 1) {
  using detail::Segment;
  std::vector<Segment<V>> heap;
  Result<V> out;
  initial_panels = std::max<std::size_t>(initial_panels, 1);
  const double width = (b - a) / static_cast<double>(initial_panels);
  V value = detail::zero_like<V>();
  double error = 0.0;
  for (std::size_t p = 0; p < initial_panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double hi = (p + 1 == initial_panels) ? b : lo + width;
    heap.push_back(detail::kronrod15<V>(f, lo, hi));
    detail::accumulate(value, heap.back().value, 1.0);
    error += heap.back().error;
    out.evaluations += 15;
  }
  std::make_heap(heap.begin(), heap.end());

  while (error > std::max(tol.abs, tol.rel * detail::magnitude(value))) {
    if (heap.size() >= tol.max_intervals) {
      std::ostringstream msg;
      msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge: error "
          << error << " after " << heap.size() << " intervals";
      throw NonConvergence(msg.str());
    }
    std::pop_heap(heap.begin(), heap.end());
    const Segment<V> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    for (auto seg : {detail::kronrod15<V>(f, worst.a, mid), detail::kronrod15<V>(f, mid, worst.b)}) {
      detail::accumulate(value, seg.value, 1.0);
      error += seg.error;
      heap.push_back(seg);
      std::push_heap(heap.begin(), heap.end());
    }
    detail::accumulate(value, worst.value, -1.0);
    error -= worst.error;
    out.evaluations += 30;
  }

  // Re-sum from scratch so the running updates leave no rounding residue.
  out.value = detail::zero_like<V>();
  out.error = 0.0;
  for (const auto& seg : heap) {
    detail::accumulate(out.value, seg.value, 1.0);
    out.error += seg.error;
  }
  return out;
}

}  // namespace msim::quadrature
