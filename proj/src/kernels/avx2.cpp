#include <immintrin.h>

#include "msim/kernels/kernels.hpp"

// Complex doubles are stored interleaved (re, im), so one __m256d holds two
// consecutive complex values.

namespace msim::kernels::avx2 {

namespace {

// (a.re*b.re - a.im*b.im, a.re*b.im + a.im*b.re) for two packed complex pairs.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

}  // namespace

bool available() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

void cmatvec(std::size_t n, const cplx* m, const cplx* x, cplx* y) {
  const std::size_t pairs = n / 2;
  auto* yd = reinterpret_cast<double*>(y);
  const auto* md = reinterpret_cast<const double*>(m);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d xk_re = _mm256_set1_pd(x[k].real());
    const __m256d xk_im = _mm256_set1_pd(x[k].imag());
    const double* col = md + 2 * k * n;
    for (std::size_t p = 0; p < pairs; ++p) {
      const __m256d mc = _mm256_loadu_pd(col + 4 * p);
      const __m256d acc = _mm256_loadu_pd(yd + 4 * p);
      const __m256d mc_sw = _mm256_permute_pd(mc, 0x5);
      const __m256d prod = _mm256_fmaddsub_pd(mc, xk_re, _mm256_mul_pd(mc_sw, xk_im));
      _mm256_storeu_pd(yd + 4 * p, _mm256_add_pd(acc, prod));
    }
    if (n % 2 != 0) {
      const cplx mv = m[k * n + n - 1];
      const double mr = mv.real();
      const double mi = mv.imag();
      const double xr = x[k].real();
      const double xi = x[k].imag();
      y[n - 1] = cplx(y[n - 1].real() + (mr * xr - mi * xi), y[n - 1].imag() + (mr * xi + mi * xr));
    }
  }
}

OscillatorSums oscillator_step(std::size_t n, const double* a, const double* b, cplx* z,
                               const cplx* rot) {
  auto* zd = reinterpret_cast<double*>(z);
  const auto* rd = reinterpret_cast<const double*>(rot);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t pairs = n / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const __m256d zv = _mm256_loadu_pd(zd + 4 * p);
    // weights laid out as (a0, b0, a1, b1) to match (re0, im0, re1, im1)
    const __m256d w = _mm256_set_pd(b[2 * p + 1], a[2 * p + 1], b[2 * p], a[2 * p]);
    acc = _mm256_fmadd_pd(w, zv, acc);
    _mm256_storeu_pd(zd + 4 * p, cmul(zv, _mm256_loadu_pd(rd + 4 * p)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  OscillatorSums s{lanes[0] + lanes[2], lanes[1] + lanes[3]};
  if (n % 2 != 0) {
    const std::size_t i = n - 1;
    const double zr = z[i].real();
    const double zi = z[i].imag();
    s.cos_sum += a[i] * zr;
    s.sin_sum += b[i] * zi;
    const double rr = rot[i].real();
    const double ri = rot[i].imag();
    z[i] = cplx(zr * rr - zi * ri, zr * ri + zi * rr);
  }
  return s;
}

}  // namespace msim::kernels::avx2
