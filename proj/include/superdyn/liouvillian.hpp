#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "superdyn/numerics.hpp"
#include "superdyn/potential.hpp"
#include "superdyn/superspace.hpp"

namespace superdyn {

/// Liouville operator on the (Q, q) grid:
///   iħ ∂ₜρ = [Ĥ_Q - Ĥ_q + ℰ(Q,q)] ρ,   Ĥ_χ = -(ħ²/2m)∂²_χ + V(χ),
/// with ℰ present only for classical dynamics.
///
/// The kinetic term is spectral on the periodic grid. Application is matrix-free
/// (FFT kinetic plus a diagonal multiply); `dense()` materializes the n²×n² matrix
/// in the column-major vec convention for small grids.
class GridLiouvillian {
 public:
  GridLiouvillian(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                  double mass = 1.0, double hbar = 1.0);

  const SuperGrid& grid() const { return grid_; }
  Dynamics kind() const { return kind_; }
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }

  /// V(Q_a) - V(q_b)
  const MatrixXd& potential_diagonal() const { return potential_diag_; }
  /// ℰ(Q_a, q_b); identically zero for quantum dynamics.
  const MatrixXd& e_diagonal() const { return e_diag_; }
  /// Full superpotential 𝒱(Q_a, q_b) = potential + ℰ.
  MatrixXd super_diagonal() const { return potential_diag_ + e_diag_; }

  /// ħ²k²/2m in FFT order.
  const VectorXd& kinetic_spectrum() const { return kinetic_; }
  /// Real symmetric one-body Hamiltonian T + diag(V) on the grid.
  MatrixXd one_body_hamiltonian() const;

  /// ℒρ, i.e. iħ ∂ₜρ.
  MatrixXcd apply(const MatrixXcd& rho) const;
  /// n² × n² matrix of ℒ acting on vec(ρ). Throws DimensionTooLarge beyond kMaxDenseDimension.
  MatrixXcd dense() const;

 private:
  SuperGrid grid_;
  Dynamics kind_;
  double mass_, hbar_;
  PolynomialPotential v_;
  MatrixXd potential_diag_;
  MatrixXd e_diag_;
  VectorXd kinetic_;
};

GridLiouvillian build_grid_liouvillian(const PolynomialPotential& v, const SuperGrid& grid,
                                       Dynamics kind, double mass = 1.0, double hbar = 1.0);

/// ℒ_{jk,lm} = H_{jl} δ_{km} - H*_{km} δ_{jl} (+ 𝒮_{jk,lm}) on an N-dimensional basis.
///
/// Vectorization is column-major: the pair (j, k) sits at index j + N k.
class BasisLiouvillian {
 public:
  BasisLiouvillian(MatrixXcd hamiltonian, std::optional<MatrixXcd> superoperator = std::nullopt,
                   double hermitian_tol = 1e-12);

  Eigen::Index dimension() const { return h_.rows(); }
  const MatrixXcd& hamiltonian() const { return h_; }
  const std::optional<MatrixXcd>& superoperator() const { return s_add_; }

  /// Hρ - ρH + 𝒮ρ
  MatrixXcd apply(const MatrixXcd& rho) const;
  /// N² × N² matrix. Throws DimensionTooLarge beyond kMaxDenseDimension.
  MatrixXcd dense() const;

 private:
  MatrixXcd h_;
  std::optional<MatrixXcd> s_add_;
};

BasisLiouvillian build_basis_liouvillian(const MatrixXcd& h,
                                         const std::optional<MatrixXcd>& s_add = std::nullopt);

/// Eigenvalues of a dense Liouvillian.
std::vector<cplx> spectrum(const GridLiouvillian& l);
std::vector<cplx> spectrum(const BasisLiouvillian& l);

/// Largest |ρ| on the grid boundary divided by the largest |ρ| overall; the
/// periodic truncation is trustworthy only when this is negligible.
double boundary_fraction(const SuperDensity& rho);

/// Writes a dense operator as CSV with re/im interleaved columns.
void write_dense_csv(const std::filesystem::path& path, const MatrixXcd& op);

}  // namespace superdyn
