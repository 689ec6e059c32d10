#include "msim/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "msim/errors.hpp"
#include "msim/kernels/kernels.hpp"

namespace msim {

namespace {

void require_model_dim(int dim, const char* what) {
  if (dim != 2 && dim != 4) {
    std::ostringstream msg;
    msg << what << ": operator dimension " << dim << " is not 2 or 4";
    throw InvalidArgument(msg.str());
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw InvalidArgument(msg.str());
  }
}

Matrix unvec(const Vector& v, int dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

// ---------------------------------------------------------------- Operator

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    std::ostringstream msg;
    msg << "operator must be square, got " << m_.rows() << "x" << m_.cols();
    throw InvalidArgument(msg.str());
  }
}

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::transition(int dim, int row, int col) {
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return Operator(std::move(m));
}

bool Operator::is_hermitian(double tol) const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

Operator Operator::operator+(const Operator& o) const {
  require_same_dim(dim(), o.dim(), "operator sum");
  return Operator(m_ + o.m_);
}
Operator Operator::operator-(const Operator& o) const {
  require_same_dim(dim(), o.dim(), "operator difference");
  return Operator(m_ - o.m_);
}
Operator Operator::operator*(const Operator& o) const {
  require_same_dim(dim(), o.dim(), "operator product");
  return Operator(m_ * o.m_);
}

// ----------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw InvalidArgument("density matrix must be square");
  std::ostringstream msg;
  if (trace_error() > 1e-10) {
    msg << "density matrix trace deviates from 1 by " << trace_error();
  } else if (hermiticity_error() > 1e-10) {
    msg << "density matrix is not Hermitian (max |rho - rho^dag| = " << hermiticity_error() << ")";
  } else if (min_eigenvalue() < -kPositivityWarn) {
    msg << "density matrix has negative eigenvalue " << min_eigenvalue();
  } else {
    return;
  }
  throw InvalidArgument(msg.str());
}

DensityMatrix DensityMatrix::unchecked(Matrix m) { return DensityMatrix(std::move(m), Unchecked{}); }

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
  Matrix m = Matrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(std::move(m), Unchecked{});
}

DensityMatrix DensityMatrix::from_vec(const Vector& v, int dim) { return unchecked(unvec(v, dim)); }

Vector DensityMatrix::vec() const { return Eigen::Map<const Vector>(m_.data(), m_.size()); }

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - 1.0); }

double DensityMatrix::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// ----------------------------------------------------------- Superoperator

Superoperator::Superoperator(int hilbert_dim, Matrix m) : dim_(hilbert_dim), m_(std::move(m)) {
  const auto n = static_cast<Eigen::Index>(dim_) * dim_;
  if (m_.rows() != n || m_.cols() != n) {
    std::ostringstream msg;
    msg << "superoperator for dimension " << dim_ << " must be " << n << "x" << n;
    throw InvalidArgument(msg.str());
  }
}

Superoperator Superoperator::zero(int hilbert_dim) {
  const int n = hilbert_dim * hilbert_dim;
  return Superoperator(hilbert_dim, Matrix::Zero(n, n));
}

Matrix Superoperator::apply(const Matrix& rho) const {
  require_same_dim(static_cast<int>(rho.rows()), dim_, "superoperator application");
  const Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
  return unvec(m_ * v, dim_);
}

Superoperator Superoperator::operator+(const Superoperator& o) const {
  require_same_dim(dim_, o.dim_, "superoperator sum");
  return Superoperator(dim_, m_ + o.m_);
}

Superoperator Superoperator::operator*(cplx s) const { return Superoperator(dim_, m_ * s); }

// ------------------------------------------------------------ generators

Superoperator commutator_term(const Operator& h) {
  require_model_dim(h.dim(), "commutator_term");
  const Matrix id = Matrix::Identity(h.dim(), h.dim());
  const Matrix m = cplx(0.0, -1.0) * (Eigen::kroneckerProduct(id, h.matrix()).eval() -
                                      Eigen::kroneckerProduct(h.matrix().transpose(), id).eval());
  return Superoperator(h.dim(), m);
}

Superoperator lindblad_term(const Operator& c) {
  require_model_dim(c.dim(), "lindblad_term");
  const Matrix& cm = c.matrix();
  const Matrix id = Matrix::Identity(c.dim(), c.dim());
  const Matrix cdc = cm.adjoint() * cm;
  Matrix m = Eigen::kroneckerProduct(cm.conjugate(), cm).eval();
  m -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
  m -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
  return Superoperator(c.dim(), m);
}

Superoperator cross_dephasing_term(const Operator& c) {
  require_model_dim(c.dim(), "cross_dephasing_term");
  const Matrix& cm = c.matrix();
  const Matrix id = Matrix::Identity(c.dim(), c.dim());
  const Matrix c2 = cm * cm;
  Matrix m = Eigen::kroneckerProduct(cm.transpose(), cm).eval();
  m -= 0.5 * Eigen::kroneckerProduct(id, c2).eval();
  m -= 0.5 * Eigen::kroneckerProduct(c2.transpose(), id).eval();
  return Superoperator(c.dim(), m);
}

Superoperator assemble_liouvillian(const Operator& h, std::span<const Channel> channels) {
  Superoperator l = commutator_term(h);
  for (const Channel& ch : channels) {
    if (!finite(ch.rate)) {
      std::ostringstream msg;
      msg << "channel '" << ch.label << "' has non-finite rate " << ch.rate;
      throw InvalidArgument(msg.str());
    }
    require_same_dim(ch.op.dim(), h.dim(), "assemble_liouvillian");
    if (ch.rate == 0.0) continue;
    const Superoperator term =
        ch.kind == ChannelKind::lindblad ? lindblad_term(ch.op) : cross_dephasing_term(ch.op);
    l = l + term * ch.rate;
  }
  return l;
}

// --------------------------------------------------------------- dynamics

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat, the embedded 4th-order error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
static_assert(c2 > 0 && c3 > 0 && c4 > 0 && c5 > 0);  // autonomous system: nodes unused

class RkStepper {
 public:
  RkStepper(const Superoperator& l, const EvolveOptions& opt)
      : l_(l.matrix()), n_(static_cast<std::size_t>(l_.rows())), opt_(opt), k_(7, Vector(n_)),
        tmp_(n_), err_(n_), y_new_(n_), kernels_(kernels::active()) {}

  void deriv(const Vector& y, Vector& out) const { kernels_.cmatvec(n_, l_.data(), y.data(), out.data()); }

  double scaled_norm(const Vector& v, const Vector& y_ref) const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(y_ref[i]);
      m = std::max(m, std::abs(v[i]) / sc);
    }
    return m;
  }

  double initial_step(const Vector& y, double span) {
    deriv(y, k_[0]);
    const double d0 = scaled_norm(y, y);
    const double d1 = scaled_norm(k_[0], y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    tmp_ = y + h0 * k_[0];
    deriv(tmp_, k_[1]);
    const double d2 = scaled_norm(k_[1] - k_[0], y) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min(100.0 * h0, h1);
  }

  // Advances y over [t, t_end] in accepted steps; h carries across calls.
  void advance(Vector& y, double t, double t_end, double& h, TrajectoryStats& stats, double min_h) {
    bool have_k1 = false;
    while (t < t_end) {
      const bool last = t + h >= t_end;
      const double step = last ? t_end - t : h;
      if (step < min_h) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " (h = " << step << ")";
        throw NonConvergence(msg.str());
      }
      if (!have_k1) deriv(y, k_[0]);
      have_k1 = false;
      tmp_ = y + step * (a21 * k_[0]);
      deriv(tmp_, k_[1]);
      tmp_ = y + step * (a31 * k_[0] + a32 * k_[1]);
      deriv(tmp_, k_[2]);
      tmp_ = y + step * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
      deriv(tmp_, k_[3]);
      tmp_ = y + step * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
      deriv(tmp_, k_[4]);
      tmp_ = y + step * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
      deriv(tmp_, k_[5]);
      y_new_ = y + step * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
      deriv(y_new_, k_[6]);
      err_ = step * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);

      double en = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double sc = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
        en = std::max(en, std::abs(err_[i]) / sc);
      }
      const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        y.swap(y_new_);
        std::swap(k_[0], k_[6]);  // FSAL
        have_k1 = true;
        t = last ? t_end : t + step;
        ++stats.steps;
        // A step clipped to land on the grid says nothing about the natural size.
        if (!last) h = step * factor;
        else h = std::max(h, step * factor);
      } else {
        ++stats.rejected_steps;
        h = step * std::min(factor, 1.0);
      }
      if (stats.steps + stats.rejected_steps > opt_.max_steps) {
        throw NonConvergence("step budget exhausted during evolution");
      }
    }
  }

 private:
  const Matrix& l_;
  std::size_t n_;
  EvolveOptions opt_;
  std::vector<Vector> k_;
  Vector tmp_, err_, y_new_;
  const kernels::KernelTable& kernels_;
};

void check_state(const DensityMatrix& rho, double t, TrajectoryStats& stats) {
  const double tr = rho.trace_error();
  const double he = rho.hermiticity_error();
  const double ev = rho.min_eigenvalue();
  stats.max_trace_error = std::max(stats.max_trace_error, tr);
  stats.max_hermiticity_error = std::max(stats.max_hermiticity_error, he);
  stats.min_eigenvalue = std::min(stats.min_eigenvalue, ev);
  if (ev < -kPositivityWarn && ev >= -kInvariantAbort) ++stats.positivity_warnings;
  if (tr > kInvariantAbort || he > kInvariantAbort || ev < -kInvariantAbort) {
    std::ostringstream msg;
    msg << "state at t = " << t << " ps left the physical set: trace error " << tr
        << ", Hermiticity error " << he << ", min eigenvalue " << ev;
    throw InvariantViolation(msg.str());
  }
}

void require_grid(std::span<const double> times, const char* what) {
  if (times.empty()) throw InvalidArgument(std::string(what) + ": empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument(std::string(what) + ": time grid must be strictly increasing");
    }
  }
}

bool uniform_step(std::span<const double> times, double& step) {
  if (times.size() < 2) return false;
  step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - step) > 1e-9 * step) return false;
  }
  return true;
}

}  // namespace

Matrix propagator(const Superoperator& l, double t) { return (l.matrix() * cplx(t)).exp(); }

Trajectory evolve(const Superoperator& l, const DensityMatrix& rho0, std::span<const double> times,
                  const EvolveOptions& options) {
  require_same_dim(rho0.dim(), l.hilbert_dim(), "evolve");
  require_grid(times, "evolve");
  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  traj.states.push_back(rho0);
  check_state(rho0, times[0], traj.stats);
  if (times.size() == 1) return traj;

  const int dim = l.hilbert_dim();
  Vector y = rho0.vec();
  const double span = times.back() - times.front();

  if (options.method == Propagation::exponential) {
    const auto& k = kernels::active();
    const auto n = static_cast<std::size_t>(y.size());
    Vector next(y.size());
    Matrix step_prop;
    double cached_dt = -1.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double dt = times[i] - times[i - 1];
      if (dt != cached_dt) {
        step_prop = propagator(l, dt);
        cached_dt = dt;
      }
      k.cmatvec(n, step_prop.data(), y.data(), next.data());
      y.swap(next);
      ++traj.stats.steps;
      traj.states.push_back(DensityMatrix::from_vec(y, dim));
      check_state(traj.states.back(), times[i], traj.stats);
    }
    return traj;
  }

  RkStepper rk(l, options);
  double h = rk.initial_step(y, span);
  const double min_h = options.min_step * span;
  for (std::size_t i = 1; i < times.size(); ++i) {
    rk.advance(y, times[i - 1], times[i], h, traj.stats, min_h);
    traj.states.push_back(DensityMatrix::from_vec(y, dim));
    check_state(traj.states.back(), times[i], traj.stats);
  }
  return traj;
}

DensityMatrix steady_state(const Superoperator& l) {
  const int dim = l.hilbert_dim();
  Eigen::JacobiSVD<Matrix> svd(l.matrix(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index n = sv.size();
  const double tol = 1e-10 * std::max(sv[0], 1e-300);
  Eigen::Index kernel = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sv[i] <= tol) ++kernel;
  }
  if (kernel != 1) {
    std::ostringstream msg;
    msg << "steady state is not unique: Liouvillian kernel dimension " << kernel
        << " (smallest singular values " << sv[n - 1] << ", " << (n > 1 ? sv[n - 2] : 0.0) << ")";
    throw NonConvergence(msg.str());
  }
  const Vector v = svd.matrixV().col(n - 1);
  Matrix rho = unvec(v, dim);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw NonConvergence("steady-state kernel vector is traceless");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::unchecked(std::move(rho));
}

double steady_state_residual(const Superoperator& l, const DensityMatrix& rho) {
  return (l.matrix() * rho.vec()).norm();
}

cplx expectation(const Operator& a, const DensityMatrix& rho) { return (a.matrix() * rho.matrix()).trace(); }

std::vector<cplx> two_time_correlation(const Superoperator& l, const Operator& a, const Operator& b,
                                       const DensityMatrix& rho, std::span<const double> taus,
                                       Propagation method) {
  const int dim = l.hilbert_dim();
  require_same_dim(a.dim(), dim, "two_time_correlation");
  require_same_dim(b.dim(), dim, "two_time_correlation");
  require_same_dim(rho.dim(), dim, "two_time_correlation");
  require_grid(taus, "two_time_correlation");
  if (taus.front() != 0.0) throw InvalidArgument("two_time_correlation: lag grid must start at 0");

  const Matrix b_rho = b.matrix() * rho.matrix();
  const Matrix at = a.matrix().transpose();
  const Eigen::Map<const Vector> weights(at.data(), at.size());
  std::vector<cplx> out;
  out.reserve(taus.size());
  // tau = 0 straight from the definition
  out.push_back((a.matrix() * b_rho).trace());
  if (taus.size() == 1) return out;

  Vector v = Eigen::Map<const Vector>(b_rho.data(), b_rho.size());
  double step = 0.0;
  if (method == Propagation::exponential && uniform_step(taus, step)) {
    const Matrix p = propagator(l, step);
    const auto& k = kernels::active();
    const auto n = static_cast<std::size_t>(v.size());
    Vector next(v.size());
    for (std::size_t i = 1; i < taus.size(); ++i) {
      k.cmatvec(n, p.data(), v.data(), next.data());
      v.swap(next);
      out.push_back(weights.cwiseProduct(v).sum());
    }
    return out;
  }

  // Non-uniform lags or explicit RK: propagate B rho (not a state) directly.
  if (method == Propagation::exponential) {
    for (std::size_t i = 1; i < taus.size(); ++i) {
      v = propagator(l, taus[i] - taus[i - 1]) * v;
      out.push_back(weights.cwiseProduct(v).sum());
    }
    return out;
  }
  EvolveOptions opt;
  RkStepper rk(l, opt);
  TrajectoryStats stats;
  const double span = taus.back();
  double h = rk.initial_step(v.norm() > 0 ? v : Vector::Ones(v.size()), span);
  for (std::size_t i = 1; i < taus.size(); ++i) {
    rk.advance(v, taus[i - 1], taus[i], h, stats, opt.min_step * span);
    out.push_back(weights.cwiseProduct(v).sum());
  }
  return out;
}

}  // namespace msim
