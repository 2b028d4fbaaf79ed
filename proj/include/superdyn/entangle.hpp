#pragma once

#include <vector>

#include "superdyn/numerics.hpp"
#include "superdyn/potential.hpp"

namespace superdyn {

/// Two identical truncated oscillators; tensor index i₁ · n_levels + i₂.
struct BipartiteBasis {
  int n_levels = 4;
  double omega = 1.0;
  double mass = 1.0;
  double hbar = 1.0;

  void validate() const;
  int dim() const { return n_levels * n_levels; }
};

/// X = sqrt(ħ/2mω)(a + a†) on one truncated subsystem.
MatrixXcd position_operator(const BipartiteBasis& basis);
/// X₁ = X ⊗ I and X₂ = I ⊗ X on the joint space.
MatrixXcd position_operator_1(const BipartiteBasis& basis);
MatrixXcd position_operator_2(const BipartiteBasis& basis);
/// ħω(n₁ + ½) + ħω(n₂ + ½), diagonal in the tensor basis.
MatrixXcd bipartite_free_hamiltonian(const BipartiteBasis& basis);

/// Liouville-space matrix of ρ ↦ Σ c · X₁^a X₂^c ρ X₁^b X₂^d for monomials Q₁^a q₁^b Q₂^c q₂^d.
///
/// Bra variables act from the left and ket variables from the right, so a monomial that
/// mixes the bra of one subsystem with the ket of the other acts on both sides at once.
MatrixXcd superpotential_action(const BipartiteBasis& basis, const Polynomial4& polynomial);
/// Same for a single classified monomial.
MatrixXcd monomial_action(const BipartiteBasis& basis, const ClassifiedMonomial& term);

/// ℒ = [H₀, ·] + 𝒱̂ with 𝒱 the quantum or classical quartic coupling λ(x₁ - x₂)⁴;
/// iħ ∂ₜ vec ρ = ℒ vec ρ.
MatrixXcd build_bipartite_liouvillian(const BipartiteBasis& basis, double lambda, Dynamics kind);

/// Partial trace; subsystem is 1 or 2 and names the factor that is kept.
MatrixXcd reduced_density(const MatrixXcd& rho, int n_levels, int subsystem);

struct EntanglementMetrics {
  /// Tr ρ₁²
  double reduced_purity = 1.0;
  /// Eigenvalues of ρ, ascending; negative values are data, not errors.
  std::vector<double> eigenvalues;
};

EntanglementMetrics entanglement_metrics(const MatrixXcd& rho, int n_levels);

/// Product of coherent states |α₁⟩⊗|α₂⟩ truncated and renormalized.
MatrixXcd coherent_product_state(const BipartiteBasis& basis, cplx alpha1, cplx alpha2);

/// Largest population on the top level of either subsystem.
double top_level_population(const MatrixXcd& rho, int n_levels);

struct EntanglementRow {
  double t = 0.0;
  double purity_cl = 1.0, purity_qm = 1.0;
  double min_eig_cl = 0.0, min_eig_qm = 0.0;
  /// max over both runs of |Tr ρ(t) - Tr ρ(0)|
  double trace_drift = 0.0;
  /// max over both runs of the hermiticity deviation
  double hermiticity = 0.0;
};

/// Runs both dynamics from the same separable ρ0 and reports metrics at each time.
/// When leak_limit > 0, TruncationLeak is raised if the top-level population exceeds it.
std::vector<EntanglementRow> compare_cl_qm_entanglement(const BipartiteBasis& basis, double lambda,
                                                        const MatrixXcd& rho0,
                                                        const std::vector<double>& times,
                                                        double leak_limit = 1e-6);

}  // namespace superdyn
