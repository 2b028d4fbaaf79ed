#pragma once

#include <array>
#include <string>
#include <vector>

#include "superdyn/numerics.hpp"

namespace superdyn {

/// Two-level atom ⊗ truncated cavity mode. ω_g ≡ 0, so ω_e is the transition frequency.
struct JCParams {
  double omega_e = 1.0;
  double omega = 1.0;
  double d_eg = 0.0;
  int n_max = 4;
  /// ℰ_{eg,eg}; ℰ_{ge,ge} = -conj(ℰ_{eg,eg}) is implied.
  cplx eps_egeg = 0.0;
  /// ℰ_{ee,gg}; ℰ_{gg,ee} = -conj(ℰ_{ee,gg}) is implied.
  cplx eps_eegg = 0.0;

  void validate() const;
  int fock_dim() const { return n_max + 1; }
  int dim() const { return 2 * (n_max + 1); }
};

inline constexpr int kGround = 0;
inline constexpr int kExcited = 1;

/// Basis index of |atom, n⟩: atom · (n_max + 1) + n.
inline int jc_index(int atom, int n, int n_max) { return atom * (n_max + 1) + n; }

/// Truncated annihilation operator on {|0⟩, …, |n_max⟩}.
MatrixXcd annihilation(int n_max);

/// ω_e|e⟩⟨e| + ω(a†a + ½) + i d (a|e⟩⟨g| - |g⟩⟨e|a†)
MatrixXcd build_jc_hamiltonian(const JCParams& p);

/// Σᵢ ωᵢ|i⟩⟨i| + ω(a†a + ½) + i Σ_{i≠j} d_ij (a - a†)|i⟩⟨j| on levels ⊗ Fock.
///
/// With rotating_wave set, only a|i⟩⟨j| for ωᵢ > ω_j and a†|i⟩⟨j| for ωᵢ < ω_j are kept.
/// Requires a real symmetric dipole matrix; otherwise throws NonHermitianAssembly.
MatrixXcd build_multilevel_hamiltonian(const std::vector<double>& levels, const MatrixXd& dipoles,
                                       double omega, int n_max, bool rotating_wave = false);

/// Atom-space tensor ℰ[a][b][c][d] = ℰ_{ab,cd} for the two-level system.
using AtomSuperoperator = std::array<std::array<std::array<std::array<cplx, 2>, 2>, 2>, 2>;
AtomSuperoperator jc_atom_superoperator(const JCParams& p);

/// Dense superoperator (ℰ̂ρ)_{(a,n),(b,n')} = Σ_{cd} ℰ_{ab,cd} ρ_{(c,n),(d,n')}.
MatrixXcd jc_superoperator_matrix(const JCParams& p);

/// Dense Liouvillian of i∂ₜρ = [Ĥ_JC, ρ] + ℰ̂ρ.
MatrixXcd jc_liouvillian(const JCParams& p);

/// Population of the top two Fock levels; TruncationLeak is raised above `limit`.
double top_fock_population(const MatrixXcd& rho, int n_max);
void check_truncation(const MatrixXcd& rho, int n_max, double limit = 1e-6);

/// Exact evolution of i∂ₜρ = [Ĥ_JC, ρ] + ℰ̂ρ.
MatrixXcd jc_evolve_exact(const JCParams& p, const MatrixXcd& rho0, double t,
                          bool guard_truncation = true);

/// Evolves once and reports every requested time (cheaper than repeated jc_evolve_exact).
std::vector<MatrixXcd> jc_evolve_exact_series(const JCParams& p, const MatrixXcd& rho0,
                                              const std::vector<double>& times,
                                              bool guard_truncation = true);

/// First-order evolution of a factorized initial state ρ_atom ⊗ ρ_field:
///   ρ(t) ≈ 𝒰_free(t)[ρ0 - it([V̂_dip, ρ0] + ℰ̂ρ0)]
/// written block by block in terms of the atom and field factors.
/// Throws NotFactorized if ρ0 is not a product to 1e-10.
MatrixXcd jc_evolve_first_order(const JCParams& p, const MatrixXcd& rho0, double t);

struct FactorizedState {
  Eigen::Matrix2cd atom;
  MatrixXcd field;
};

/// Partial traces of ρ; `residual` is max |ρ - atom ⊗ field| (normalized by the trace).
FactorizedState factorize(const MatrixXcd& rho, int n_max, double* residual = nullptr);

MatrixXcd jc_product_state(const Eigen::Matrix2cd& atom, const MatrixXcd& field);
/// |n⟩⟨n| on the truncated Fock space.
MatrixXcd fock_density(int n, int n_max);
/// Coherent state |α⟩⟨α| truncated at n_max and renormalized.
MatrixXcd coherent_density(cplx alpha, int n_max);

/// Tr(|e⟩⟨e| ρ)
double excited_population(const MatrixXcd& rho, int n_max);
/// ρ_{eg|00}
cplx coherence_eg00(const MatrixXcd& rho, int n_max);

}  // namespace superdyn
