#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "superdyn/numerics.hpp"
#include "superdyn/potential.hpp"

namespace superdyn {

/// Hydrogenic orbital |n, l, m⟩ in atomic units (Bohr radius 1, Z = 1).
/// Bundled orbitals cover n ≤ 3.
struct HydrogenState {
  int n = 1, l = 0, m = 0;

  void validate() const;
  int parity() const { return (l % 2 == 0) ? 1 : -1; }
  /// e.g. "1s", "2p0", "3d-1"
  std::string label() const;
};

/// Parses "1s", "2s", "2p0", "2p+1", "2p-1", "3d+2", ... (m omitted means m = 0).
HydrogenState parse_hydrogen_state(const std::string& text);

/// R_nl(r)
double hydrogen_radial(int n, int l, double r);
/// Complex spherical harmonic Y_lm evaluated from a Cartesian direction (Condon–Shortley phase).
cplx spherical_harmonic(int l, int m, const Vec3& r);
/// ψ_nlm(r) = R_nl(|r|) Y_lm(r̂)
cplx hydrogen_wavefunction(const HydrogenState& s, const Vec3& r);

struct McEstimate {
  cplx value;
  /// Standard error of the complex estimate, sqrt(Var Re + Var Im) / sqrt(N).
  double std_error = 0.0;
  long long samples = 0;
  /// Samples falling inside the ε_reg exclusion zone; they contribute zero.
  long long excluded = 0;
};

struct McOptions {
  long long samples = 1'000'000;
  std::uint64_t seed = 1;
  /// Samples per independent RNG stream; block b uses stream (seed, b).
  long long block_size = 1 << 16;
  double eps_reg = 1e-6;
  /// NotConverged is raised when std_error exceeds this.
  double tolerance = std::numeric_limits<double>::infinity();
  /// Worker threads; the result is independent of this value.
  int threads = 1;
};

/// ℰ_{ab,cd} = ∫d³Q d³q ψ*_a(Q) ψ_b(q) ℰ(Q,q) ψ_c(Q) ψ*_d(q) for V = -e²/|χ|.
///
/// Importance-sampled Monte Carlo with a defensive mixture proposal: half the samples
/// come from radial Gamma densities matched to the orbital pairs (a,c) on Q and (b,d)
/// on q, half from a density in (Q+q, Q-q) that is ∝ 1/|Q+q|² near the Coulomb
/// singular shell, which keeps the estimator variance finite.
McEstimate coulomb_superop_element(const HydrogenState& a, const HydrogenState& b,
                                   const HydrogenState& c, const HydrogenState& d, double e2,
                                   const McOptions& options = {});

}  // namespace superdyn
