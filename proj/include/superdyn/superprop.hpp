#pragma once

#include "superdyn/numerics.hpp"
#include "superdyn/potential.hpp"
#include "superdyn/superspace.hpp"

namespace superdyn {

/// Endpoints of a superpropagator 𝒢(Q_f, q_f, T | Q_i, q_i, 0).
struct PropagatorPoint {
  double Q_f = 0.0, q_f = 0.0, Q_i = 0.0, q_i = 0.0;
  double T = 1.0;
  double m = 1.0;
  double hbar = 1.0;
};

/// Weights of Γ_QM and Γ_CL in the first-order correction.
struct FirstOrderCoefficients {
  double C1 = 1.0, C2 = 0.0;
};

/// (1, 0) for quantum, (½, ½) for classical dynamics.
FirstOrderCoefficients first_order_coefficients(Dynamics kind);

/// G₀(x, y; T) = (m / 2πiħT)^{1/2} exp(i m (x - y)² / 2ħT), principal branch.
cplx free_propagator(double x, double y, double T, double m = 1.0, double hbar = 1.0);

/// 𝒢₀ = G₀(Q_f, Q_i; T) · conj G₀(q_f, q_i; T)
cplx free_superpropagator(const PropagatorPoint& pt);

/// Closed-form first-order functions of the quartic potential λx⁴ (without the λ).
cplx gamma_qm(const PropagatorPoint& pt);
cplx gamma_cl(const PropagatorPoint& pt);

/// 𝒢₀ · (1 - (i/ħ) λ [C₁Γ_QM + C₂Γ_CL])
cplx first_order_superpropagator(const PropagatorPoint& pt, double lambda, Dynamics kind);

struct DysonNumericOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  /// Gauss–Hermite order per axis for the Gaussian-bridge expectation; exact for
  /// polynomial superpotentials of degree < 2·order.
  int hermite_order = 8;
};

/// Numerical first-order correction -(i/ħ)∫dτ∫dx dy 𝒢₀(f|x,y;T-τ) 𝒱(x,y) 𝒢₀(x,y;τ|i).
///
/// The spatial integral is the expectation of 𝒱 over the complex Gaussian bridges
/// x(τ), y(τ) joining the endpoints, evaluated by Gauss–Hermite moments; the τ
/// integral is adaptive Gauss–Kronrod. Returns the correction only (without 𝒢₀ itself).
/// Throws QuadratureNotConverged if the τ integral misses its tolerance.
cplx dyson_first_order_numeric(const PropagatorPoint& pt, const PolynomialPotential& v,
                               Dynamics kind, const DysonNumericOptions& options = {});
/// Same for V = λx⁴.
cplx dyson_first_order_numeric(const PropagatorPoint& pt, double lambda, Dynamics kind,
                               const DysonNumericOptions& options = {});

/// Truncated Dyson series for the grid superpropagator over [0, T].
///
/// Works in the interaction frame of the periodic free propagator 𝒢₀ on the grid:
///   σ₀ = ρ₀,  σ_k(τ) = -(i/ħ)∫₀^τ 𝒢₀(-s) 𝒱 𝒢₀(s) σ_{k-1}(s) ds,
///   ρ(T) ≈ 𝒢₀(T) Σ_{k ≤ n_orders} σ_k(T),
/// with the s integrals by cumulative trapezoid on n_tau intervals.
class DysonSeries {
 public:
  DysonSeries(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind, double T,
              int n_orders, int n_tau = 200, double mass = 1.0, double hbar = 1.0);

  /// Applies the truncated kernel to a density.
  MatrixXcd apply(const MatrixXcd& rho0) const;
  /// Contribution of a single order k to ρ(T).
  MatrixXcd order_term(const MatrixXcd& rho0, int k) const;

 private:
  MatrixXcd free_step(const MatrixXcd& rho, double s) const;
  std::vector<MatrixXcd> orders(const MatrixXcd& rho0) const;

  SuperGrid grid_;
  MatrixXd super_diag_;
  VectorXd kinetic_;
  double T_;
  int n_orders_, n_tau_;
  double hbar_;
};

/// Dense kernel K with vec ρ(T) = K vec ρ(0), materialized column by column.
/// Throws DimensionTooLarge when n² exceeds kMaxDenseDimension.
MatrixXcd dyson_iterate(const SuperGrid& grid, const PolynomialPotential& v, Dynamics kind,
                        int n_orders, double T, int n_tau = 200, double mass = 1.0,
                        double hbar = 1.0);

}  // namespace superdyn
