#pragma once

// Dense open-system machinery for the 2- and 4-level models: operators,
// density matrices, Liouvillian superoperators, time evolution, steady states
// and two-time correlations by the quantum regression theorem.
//
// Vectorization convention: density matrices are stacked column by column,
// vec(rho)[i + d*j] = rho(i, j), which is Eigen's native column-major layout.
// Under this convention vec(A rho B) = (B^T kron A) vec(rho).

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Square operator on a 2- or 4-dimensional Hilbert space.
class Operator {
 public:
  explicit Operator(Matrix m);

  static Operator zero(int dim);
  static Operator identity(int dim);
  /// |row><col|
  static Operator transition(int dim, int row, int col);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Operator adjoint() const { return Operator(m_.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(cplx s) const { return Operator(m_ * s); }

 private:
  Matrix m_;
};

/// A physical state. The checked constructor enforces unit trace,
/// Hermiticity and positivity to within 1e-10 / 1e-10 / -1e-9.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  /// Wraps an integrator output without validation; see the diagnostics below.
  static DensityMatrix unchecked(Matrix m);
  static DensityMatrix basis_state(int dim, int index);
  static DensityMatrix from_vec(const Vector& v, int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }
  Vector vec() const;

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
  Matrix m_;
};

/// Linear map on column-stacked density matrices.
class Superoperator {
 public:
  Superoperator(int hilbert_dim, Matrix m);
  static Superoperator zero(int hilbert_dim);

  int hilbert_dim() const { return dim_; }
  const Matrix& matrix() const { return m_; }
  Matrix apply(const Matrix& rho) const;

  Superoperator operator+(const Superoperator& o) const;
  Superoperator operator*(cplx s) const;

 private:
  int dim_;
  Matrix m_;
};

enum class ChannelKind { lindblad, cross_dephasing };

/// One weighted dissipator. Rates are complex because the cross-dephasing
/// prefactors inherit the phase of the drive.
struct Channel {
  cplx rate;
  ChannelKind kind;
  Operator op;
  std::string label;
};

/// -i[H, .]
Superoperator commutator_term(const Operator& h);
/// C rho C^dag - {C^dag C, rho}/2
Superoperator lindblad_term(const Operator& c);
/// C rho C - {C^2, rho}/2
Superoperator cross_dephasing_term(const Operator& c);
Superoperator assemble_liouvillian(const Operator& h, std::span<const Channel> channels);

enum class Propagation { adaptive_rk, exponential };

struct EvolveOptions {
  Propagation method = Propagation::adaptive_rk;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double min_step = 1e-14;  ///< relative to the span of the time grid
  std::size_t max_steps = 50'000'000;
};

/// Diagnostics gathered while checking every state of a trajectory.
struct TrajectoryStats {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  std::size_t positivity_warnings = 0;  ///< states with -1e-7 <= lambda_min < -1e-9
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  TrajectoryStats stats;
};

/// Abort threshold for trace, Hermiticity and negative eigenvalues.
inline constexpr double kInvariantAbort = 1e-7;
/// Negative eigenvalues above this are treated as rounding and not reported.
inline constexpr double kPositivityWarn = 1e-9;

/// Integrates d rho/dt = L rho on a monotone time grid starting at times[0].
/// Throws NonConvergence on step-size underflow and InvariantViolation when a
/// state breaks trace, Hermiticity or positivity by more than 1e-7.
Trajectory evolve(const Superoperator& l, const DensityMatrix& rho0, std::span<const double> times,
                  const EvolveOptions& options = {});

/// exp(L t), by scaling and squaring.
Matrix propagator(const Superoperator& l, double t);

/// Unique fixed point of L from the smallest right singular vector.
/// Throws NonConvergence when the numerical kernel is not one-dimensional.
DensityMatrix steady_state(const Superoperator& l);

/// ||L vec(rho)||_2
double steady_state_residual(const Superoperator& l, const DensityMatrix& rho);

/// <A(tau) B(0)> = Tr[A exp(L tau)(B rho)] on a monotone grid of lags
/// starting at 0. Uniform grids reuse a single step propagator.
std::vector<cplx> two_time_correlation(const Superoperator& l, const Operator& a, const Operator& b,
                                       const DensityMatrix& rho, std::span<const double> taus,
                                       Propagation method = Propagation::exponential);

/// Expectation value Tr[A rho].
cplx expectation(const Operator& a, const DensityMatrix& rho);

}  // namespace msim
