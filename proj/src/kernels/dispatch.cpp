#include <cstdlib>
#include <string_view>

#include "msim/kernels/kernels.hpp"

namespace msim::kernels {

#ifndef MSIM_HAVE_AVX2
namespace avx2 {
bool available() { return false; }
void cmatvec(std::size_t n, const cplx* m, const cplx* x, cplx* y) { scalar::cmatvec(n, m, x, y); }
OscillatorSums oscillator_step(std::size_t n, const double* a, const double* b, cplx* z,
                               const cplx* rot) {
  return scalar::oscillator_step(n, a, b, z, rot);
}
}  // namespace avx2
#endif

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::cmatvec, &scalar::oscillator_step};
constexpr KernelTable kAvx2{Isa::avx2, &avx2::cmatvec, &avx2::oscillator_step};

const KernelTable& resolve() {
  if (const char* env = std::getenv("MIRROR_SIM_KERNELS"); env != nullptr) {
    if (std::string_view(env) == "scalar") return kScalar;
  }
  return avx2::available() ? kAvx2 : kScalar;
}

}  // namespace

const KernelTable& table_for(Isa isa) {
  if (isa == Isa::avx2 && avx2::available()) return kAvx2;
  return kScalar;
}

const KernelTable& active() {
  static const KernelTable& table = resolve();
  return table;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace msim::kernels
