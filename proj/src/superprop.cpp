#include "superdyn/superprop.hpp"

#include <cmath>

#include "superdyn/errors.hpp"

namespace superdyn {

namespace {

void require_positive_time(double T) {
  if (!(T > 0.0)) raise(ErrorKind::NonpositiveTime, "propagation time must be positive");
}

/// Polynomial and its derivative at a complex argument (Horner).
cplx poly_value(std::span<const double> c, cplx z) {
  cplx acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
  return acc;
}

cplx poly_slope(std::span<const double> c, cplx z) {
  cplx acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * c[k];
  return acc;
}

cplx complex_super_potential(std::span<const double> c, Dynamics kind, cplx Q, cplx q) {
  if (kind == Dynamics::QM) return poly_value(c, Q) - poly_value(c, q);
  return (Q - q) * poly_slope(c, 0.5 * (Q + q));
}

/// Bracket of Γ_QM for one of the two path pairs.
cplx qm_bracket(double a, double b, double T, double m, double hbar) {
  const cplx fluct = 0.5 * (kI * hbar * T / m) * (3.0 * a * a + 4.0 * a * b + 3.0 * b * b);
  const double poly = a * a * a * a + a * a * a * b + a * a * b * b + a * b * b * b + b * b * b * b;
  return (T / 5.0) * (fluct + poly);
}

/// Q³(4q+q′) + Q²Q′(3q+2q′) + QQ′²(2q+3q′) + Q′³(q+4q′)
double cl_polynomial(double Q, double Qp, double q, double qp) {
  return Q * Q * Q * (4.0 * q + qp) + Q * Q * Qp * (3.0 * q + 2.0 * qp) +
         Q * Qp * Qp * (2.0 * q + 3.0 * qp) + Qp * Qp * Qp * (q + 4.0 * qp);
}

}  // namespace

FirstOrderCoefficients first_order_coefficients(Dynamics kind) {
  if (kind == Dynamics::QM) return {1.0, 0.0};
  return {0.5, 0.5};
}

cplx free_propagator(double x, double y, double T, double m, double hbar) {
  require_positive_time(T);
  const double d = x - y;
  const cplx amplitude = std::sqrt(m / (2.0 * kPi * hbar * T)) * std::exp(-kI * (kPi / 4.0));
  return amplitude * std::exp(kI * (m * d * d / (2.0 * hbar * T)));
}

cplx free_superpropagator(const PropagatorPoint& pt) {
  return free_propagator(pt.Q_f, pt.Q_i, pt.T, pt.m, pt.hbar) *
         std::conj(free_propagator(pt.q_f, pt.q_i, pt.T, pt.m, pt.hbar));
}

cplx gamma_qm(const PropagatorPoint& pt) {
  if (pt.T < 0.0) raise(ErrorKind::NonpositiveTime, "Γ needs T >= 0");
  return qm_bracket(pt.Q_f, pt.Q_i, pt.T, pt.m, pt.hbar) -
         std::conj(qm_bracket(pt.q_f, pt.q_i, pt.T, pt.m, pt.hbar));
}

cplx gamma_cl(const PropagatorPoint& pt) {
  if (pt.T < 0.0) raise(ErrorKind::NonpositiveTime, "Γ needs T >= 0");
  const double Q = pt.Q_f, Qp = pt.Q_i, q = pt.q_f, qp = pt.q_i;
  const cplx fluct =
      (kI * pt.hbar * pt.T / pt.m) * (3.0 * Q * q + 2.0 * Q * qp + 2.0 * Qp * q + 3.0 * Qp * qp);
  const double poly = 0.5 * cl_polynomial(Q, Qp, q, qp) - 0.5 * cl_polynomial(q, qp, Q, Qp);
  return (pt.T / 5.0) * (fluct + poly);
}

cplx first_order_superpropagator(const PropagatorPoint& pt, double lambda, Dynamics kind) {
  const cplx g0 = free_superpropagator(pt);
  const FirstOrderCoefficients c = first_order_coefficients(kind);
  return g0 * (1.0 - (kI / pt.hbar) * lambda * (c.C1 * gamma_qm(pt) + c.C2 * gamma_cl(pt)));
}

cplx dyson_first_order_numeric(const PropagatorPoint& pt, const PolynomialPotential& v,
                               Dynamics kind, const DysonNumericOptions& options) {
  require_positive_time(pt.T);
  const auto coeffs = v.coefficients();
  if (coeffs.empty()) return 0.0;
  const GaussRule gh = gauss_hermite(options.hermite_order);

  // Bridge statistics at s = τ/T: x has mean Q_i(1-s) + Q_f s and variance iħTs(1-s)/m,
  // y the same with (q_i, q_f) and the conjugate variance.
  auto bridge_expectation = [&](double tau) -> cplx {
    const double s = tau / pt.T;
    const cplx var = kI * pt.hbar * pt.T * s * (1.0 - s) / pt.m;
    const cplx sx = std::sqrt(var);
    const cplx sy = std::sqrt(std::conj(var));
    const double mx = pt.Q_i * (1.0 - s) + pt.Q_f * s;
    const double my = pt.q_i * (1.0 - s) + pt.q_f * s;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      const cplx x = mx + sx * gh.nodes[i];
      for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        const cplx y = my + sy * gh.nodes[j];
        acc += gh.weights[i] * gh.weights[j] * complex_super_potential(coeffs, kind, x, y);
      }
    }
    return acc;
  };

  const QuadratureResult r =
      integrate_adaptive(bridge_expectation, 0.0, pt.T, options.rel_tol, options.abs_tol);
  if (!r.converged) {
    raise(ErrorKind::QuadratureNotConverged,
          "τ integral error estimate " + std::to_string(r.error_estimate));
  }
  return free_superpropagator(pt) * (-kI / pt.hbar) * r.value;
}

cplx dyson_first_order_numeric(const PropagatorPoint& pt, double lambda, Dynamics kind,
                               const DysonNumericOptions& options) {
  return dyson_first_order_numeric(pt, PolynomialPotential::monomial(4, lambda), kind, options);
}

// ---------------------------------------------------------------------------

DysonSeries::DysonSeries(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                         double T, int n_orders, int n_tau, double mass, double hbar)
    : grid_(grid), T_(T), n_orders_(n_orders), n_tau_(n_tau), hbar_(hbar) {
  grid_.validate();
  require_positive_time(T);
  if (n_orders < 0) raise(ErrorKind::InvalidArgument, "n_orders must be >= 0");
  if (n_tau < 1) raise(ErrorKind::InvalidArgument, "n_tau must be >= 1");
  const int n = grid_.n;
  super_diag_.resize(n, n);
  const Dynamics effective = e_vanishes_identically(v) ? Dynamics::QM : kind;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      super_diag_(a, b) = super_potential(v, effective, grid_.coord(a), grid_.coord(b));
    }
  }
  const VectorXd k = fft_wavenumbers(n, grid_.spacing());
  kinetic_ = (hbar * hbar / (2.0 * mass)) * k.array().square().matrix();
}

MatrixXcd DysonSeries::free_step(const MatrixXcd& rho, double s) const {
  MatrixXcd m = rho;
  fft2(m, false);
  for (Eigen::Index b = 0; b < m.cols(); ++b) {
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      m(a, b) *= std::exp(-kI * s * (kinetic_(a) - kinetic_(b)) / hbar_);
    }
  }
  fft2(m, true);
  return m;
}

std::vector<MatrixXcd> DysonSeries::orders(const MatrixXcd& rho0) const {
  if (rho0.rows() != grid_.n || rho0.cols() != grid_.n) {
    raise(ErrorKind::GridMismatch, "density shape does not match the Dyson grid");
  }
  const double h = T_ / n_tau_;
  std::vector<MatrixXcd> finals{rho0};
  std::vector<MatrixXcd> previous(n_tau_ + 1, rho0);
  std::vector<MatrixXcd> integrand(n_tau_ + 1);
  for (int k = 1; k <= n_orders_; ++k) {
    for (int j = 0; j <= n_tau_; ++j) {
      const double tau = j * h;
      integrand[j] =
          free_step(super_diag_.cast<cplx>().cwiseProduct(free_step(previous[j], tau)), -tau);
    }
    std::vector<MatrixXcd> current(n_tau_ + 1);
    current[0] = MatrixXcd::Zero(grid_.n, grid_.n);
    for (int j = 1; j <= n_tau_; ++j) {
      current[j] = current[j - 1] + (-kI / hbar_) * (0.5 * h) * (integrand[j - 1] + integrand[j]);
    }
    finals.push_back(current[n_tau_]);
    previous = std::move(current);
  }
  return finals;
}

MatrixXcd DysonSeries::order_term(const MatrixXcd& rho0, int k) const {
  if (k < 0 || k > n_orders_) raise(ErrorKind::InvalidArgument, "order out of range");
  return free_step(orders(rho0)[k], T_);
}

MatrixXcd DysonSeries::apply(const MatrixXcd& rho0) const {
  MatrixXcd sum = MatrixXcd::Zero(rho0.rows(), rho0.cols());
  for (const auto& term : orders(rho0)) sum += term;
  return free_step(sum, T_);
}

MatrixXcd dyson_iterate(const SuperGrid& grid, const PolynomialPotential& v, Dynamics kind,
                        int n_orders, double T, int n_tau, double mass, double hbar) {
  const Eigen::Index n = grid.n;
  if (n * n > kMaxDenseDimension) {
    raise(ErrorKind::DimensionTooLarge, "Dyson kernel of dimension " + std::to_string(n * n));
  }
  const DysonSeries series(v, grid, kind, T, n_orders, n_tau, mass, hbar);
  MatrixXcd kernel(n * n, n * n);
  for (Eigen::Index col = 0; col < n * n; ++col) {
    MatrixXcd basis = MatrixXcd::Zero(n, n);
    basis(col % n, col / n) = 1.0;
    kernel.col(col) = vectorize(series.apply(basis));
  }
  return kernel;
}

}  // namespace superdyn
