#pragma once

// Inner-loop kernels with a scalar reference and SIMD variants.
//
// Every variant computes the same mathematical result; they differ only in
// summation order, so results agree to a few ulps. The active variant is
// chosen once per process from CPU capabilities (overridable with
// MIRROR_SIM_KERNELS=scalar) and never changes afterwards.

#include <complex>
#include <cstddef>
#include <string_view>

namespace msim::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

/// Result of one oscillator-bank step: sum_i a_i Re(z_i) and sum_i b_i Im(z_i).
struct OscillatorSums {
  double cos_sum = 0.0;
  double sin_sum = 0.0;
};

struct KernelTable {
  Isa isa;
  /// y = M x for an n-by-n column-major complex matrix. y must not alias x.
  void (*cmatvec)(std::size_t n, const cplx* m, const cplx* x, cplx* y);
  /// Returns the weighted sums of the phasors z_i, then advances z_i *= rot_i.
  OscillatorSums (*oscillator_step)(std::size_t n, const double* a, const double* b,
                                    cplx* z, const cplx* rot);
};

namespace scalar {
void cmatvec(std::size_t n, const cplx* m, const cplx* x, cplx* y);
OscillatorSums oscillator_step(std::size_t n, const double* a, const double* b, cplx* z,
                               const cplx* rot);
}  // namespace scalar

namespace avx2 {
/// True when this build carries AVX2 code and the running CPU supports it.
bool available();
void cmatvec(std::size_t n, const cplx* m, const cplx* x, cplx* y);
OscillatorSums oscillator_step(std::size_t n, const double* a, const double* b, cplx* z,
                               const cplx* rot);
}  // namespace avx2

/// Kernel table for a specific ISA. Requesting avx2 on a machine without it
/// returns the scalar table.
const KernelTable& table_for(Isa isa);

/// The process-wide table, resolved on first use.
const KernelTable& active();

std::string_view isa_name(Isa isa);

}  // namespace msim::kernels
