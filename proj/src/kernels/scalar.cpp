#include "msim/kernels/kernels.hpp"

namespace msim::kernels::scalar {

void cmatvec(std::size_t n, const cplx* m, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double xr = x[k].real();
    const double xi = x[k].imag();
    const cplx* col = m + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double mr = col[i].real();
      const double mi = col[i].imag();
      y[i] = cplx(y[i].real() + (mr * xr - mi * xi), y[i].imag() + (mr * xi + mi * xr));
    }
  }
}

OscillatorSums oscillator_step(std::size_t n, const double* a, const double* b, cplx* z,
                               const cplx* rot) {
  OscillatorSums s;
  for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace msim::kernels::scalar
