#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "superdyn/liouvillian.hpp"

namespace superdyn {

enum class Method { MatrixExp, TrotterLie, TrotterStrang, RK4 };

std::string to_string(Method method);
Method parse_method(const std::string& text);

struct EvolutionConfig {
  double t0 = 0.0;
  double t1 = 1.0;
  int n_steps = 100;
  Method method = Method::TrotterStrang;
  double hbar = 1.0;
  double mass = 1.0;

  /// Throws InvalidArgument unless t1 > t0 and n_steps ≥ 1.
  void validate() const;
  double step() const { return (t1 - t0) / n_steps; }
};

/// Called after every completed step with the current time and state.
using GridObserver = std::function<void(double t, const SuperDensity& rho)>;

// ---------------------------------------------------------------------------
// Dense Liouville-space propagation, iħ ∂ₜ vec(ρ) = ℒ vec(ρ).

/// 𝒰(t) = exp(-iℒt/ħ) for a fixed dense ℒ; the factorization is computed once.
class ExactPropagator {
 public:
  explicit ExactPropagator(const MatrixXcd& liouvillian, double hbar = 1.0);

  VectorXcd apply(const VectorXcd& rho0, double t) const { return exp_.apply(rho0, t / hbar_); }
  MatrixXcd apply(const MatrixXcd& rho0, double t) const;
  MatrixXcd matrix(double t) const { return exp_.matrix(t / hbar_); }
  const DenseExponential& exponential() const { return exp_; }

 private:
  DenseExponential exp_;
  double hbar_;
};

MatrixXcd evolve_exact(const BasisLiouvillian& l, const MatrixXcd& rho0, double t, double hbar = 1.0);
SuperDensity evolve_exact(const GridLiouvillian& l, const SuperDensity& rho0, double t);

/// Dense generator ℒ(t) for time-ordered propagation.
using TimeDependentGenerator = std::function<MatrixXcd(double t)>;

/// Midpoint-exponential product ∏ exp(-iℒ(t_k + ε/2)ε/ħ), second order in ε.
VectorXcd evolve_ordered(const TimeDependentGenerator& l, const VectorXcd& rho0, double t0, double t1,
                         int n_steps, double hbar = 1.0);

/// ρ(t1) = 𝒰₀(t1) T-exp(-i/ħ ∫ ℒ'_I) ρ0 with ℒ'_I(τ) = 𝒰₀(τ)⁻¹ ℒ' 𝒰₀(τ).
VectorXcd evolve_interaction_picture(const MatrixXcd& l0, const MatrixXcd& l_prime,
                                     const VectorXcd& rho0, double t0, double t1, int n_steps,
                                     double hbar = 1.0);

/// First-order truncation of the interaction-picture series:
/// 𝒰₀(t)[1 - (i/ħ)∫₀ᵗ ℒ'_I(τ) dτ] ρ0, with the τ integral by Gauss–Legendre.
VectorXcd interaction_picture_first_order(const MatrixXcd& l0, const MatrixXcd& l_prime,
                                          const VectorXcd& rho0, double t, int n_quadrature = 32,
                                          double hbar = 1.0);

// ---------------------------------------------------------------------------
// Grid propagation.

/// Split-step evolution on the (Q, q) grid. Kinetic substeps are exact phases in the
/// doubly transformed representation; potential substeps are exact phases e^{-i𝒱ε/ħ}.
/// Lie splitting is first order, Strang second order.
SuperDensity evolve_trotter(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                            const SuperDensity& rho0, const EvolutionConfig& config,
                            const GridObserver& observer = {});

/// Classical RK4 on the matrix-free grid Liouvillian (reference integrator).
SuperDensity evolve_rk4(const GridLiouvillian& l, const SuperDensity& rho0,
                        const EvolutionConfig& config, const GridObserver& observer = {});

/// Dispatches on config.method. MatrixExp uses the dense Liouvillian.
SuperDensity evolve_grid(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                         const SuperDensity& rho0, const EvolutionConfig& config,
                         const GridObserver& observer = {});

// ---------------------------------------------------------------------------
// Method of characteristics.

struct PhaseSample {
  double x = 0.0;
  double p = 0.0;
  double weight = 0.0;
};

struct CharacteristicsEnsemble {
  std::vector<PhaseSample> samples;
  std::uint64_t rng_seed = 0;
};

/// Independent Gaussian samples with equal weights 1/n.
CharacteristicsEnsemble gaussian_ensemble_random(double x0, double p0, double sigma_x,
                                                 double sigma_p, int n_samples, std::uint64_t seed);

/// Tensor Gauss–Hermite ensemble with n_per_axis² weighted nodes. Moments of
/// polynomial observables are exact for the initial distribution and the error
/// decays spectrally for smooth flows.
CharacteristicsEnsemble gaussian_ensemble_quadrature(double x0, double p0, double sigma_x,
                                                     double sigma_p, int n_per_axis);

struct EnsembleMoments {
  double x = 0.0, p = 0.0, x2 = 0.0, p2 = 0.0, xp = 0.0;
};
EnsembleMoments ensemble_moments(const CharacteristicsEnsemble& ensemble);

struct CharacteristicsReport {
  CharacteristicsEnsemble ensemble;
  double dt = 0.0;
  int n_steps = 0;
  /// max over samples of |E(t) - E(0)| / E_scale, divided by t.
  double drift_per_unit_time = 0.0;
};

/// Default step: min(0.01, period/100) when V has a harmonic part, else 0.01.
double default_characteristics_step(const PolynomialPotential& v, double mass = 1.0);

/// Integrates ẋ = p/m, ṗ = -V'(x) for every sample with a fourth-order symplectic
/// composition of leapfrog steps. Throws EnergyDriftExceeded if the relative
/// energy drift per unit time exceeds drift_tol. With dt ≤ 0 the step is the default
/// step, shortened so that ω·dt ≤ 0.02 for the largest local frequency ω = sqrt(|V''|/m)
/// a sample can reach.
CharacteristicsReport evolve_characteristics(const PolynomialPotential& v,
                                             const CharacteristicsEnsemble& ensemble, double t,
                                             double dt = 0.0, double mass = 1.0,
                                             double drift_tol = 1e-6);

}  // namespace superdyn
