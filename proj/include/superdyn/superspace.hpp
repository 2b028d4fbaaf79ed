#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "superdyn/numerics.hpp"

namespace superdyn {

/// Uniform periodic phase-space grid: x_i = x_min + iΔx (i < n_x), p_j = p_min + jΔp (j < n_p).
struct PhaseGrid {
  double x_min = -1.0, x_max = 1.0;
  double p_min = -1.0, p_max = 1.0;
  int n_x = 2, n_p = 2;

  double dx() const { return (x_max - x_min) / n_x; }
  double dp() const { return (p_max - p_min) / n_p; }
  double x(int i) const { return x_min + i * dx(); }
  double p(int j) const { return p_min + j * dp(); }

  void validate() const;

  /// Grid whose momentum spacing satisfies Δx Δp = 2πħ / n_p, centred on p_center.
  static PhaseGrid reciprocal(double x_min, double x_max, int n_x, int n_p, double p_center = 0.0,
                              double hbar = 1.0);
};

/// The (Q, q) grid. Both axes share the same points so the diagonal Q = q is on-grid.
struct SuperGrid {
  double min = -1.0, max = 1.0;
  int n = 2;

  double spacing() const { return (max - min) / n; }
  double coord(int i) const { return min + i * spacing(); }

  void validate() const;
};

struct PhaseDensity {
  PhaseGrid grid;
  MatrixXd values;  // n_x × n_p, values(i, j) = ρ(x_i, p_j)
};

struct SuperDensity {
  SuperGrid grid;
  MatrixXcd values;  // n × n, values(a, b) = ρ(Q_a, q_b)
};

/// Superspace grid that pairs with a phase grid: same x range and point count.
SuperGrid super_grid_for(const PhaseGrid& grid);

/// ρ(Q,q) from ρ(x,p): DFT along p into y, then (x,y) → (Q,q) = (x + y/2, x - y/2).
///
/// The y spacing equals Δx, so Q - q lands on y points exactly; the half-step
/// x offset is a band-limited spectral shift. Requires Δx Δp = 2πħ/n_p.
SuperDensity phase_to_super(const PhaseDensity& rho, double hbar = 1.0);

/// Inverse of phase_to_super onto the given phase grid (same x axis, reciprocal p axis).
PhaseDensity super_to_phase(const SuperDensity& rho, const PhaseGrid& target, double hbar = 1.0,
                            double hermiticity_tol = 1e-6);

/// Σ_i ρ(Q_i, Q_i) ΔQ
double trace(const SuperDensity& rho);
/// Σ_i Q_i ρ(Q_i, Q_i) ΔQ
double expect_x(const SuperDensity& rho, double hermiticity_tol = 1e-6);
double expect_x2(const SuperDensity& rho, double hermiticity_tol = 1e-6);
/// Tr(P̂ρ) with P̂ = -iħ(∂_Q - ∂_q)/2 restricted to the diagonal (spectral, padding factor 2).
double expect_p(const SuperDensity& rho, double hbar = 1.0, double hermiticity_tol = 1e-6);
/// ½ Tr((X̂P̂ + P̂X̂)ρ)
double expect_xp_weyl(const SuperDensity& rho, double hbar = 1.0, double hermiticity_tol = 1e-6);
/// Tr(ρ²) = Σ |ρ(Q,q)|² ΔQ²
double purity(const SuperDensity& rho);

/// Eigenvalues of the discretized operator ρ ΔQ, sorted descending. Negative values are kept.
std::vector<double> spectrum_report(const SuperDensity& rho, double hermiticity_tol = 1e-6);

/// max |ρ(Q,q) - conj ρ(q,Q)|
double hermiticity_deviation(const SuperDensity& rho);

/// Largest |ρ| on the outermost rows and columns of the grid.
double boundary_magnitude(const SuperDensity& rho);

/// Phase-space moments by direct quadrature, with measure dx dp / 2πħ.
struct PhaseMoments {
  double norm = 0.0, x = 0.0, p = 0.0, x2 = 0.0, p2 = 0.0, xp = 0.0;
};
PhaseMoments phase_moments(const PhaseDensity& rho, double hbar = 1.0);

/// 2πħ N(x; x0, σx) N(p; p0, σp), normalized for the measure dx dp / 2πħ.
PhaseDensity gaussian_phase_density(const PhaseGrid& grid, double x0, double p0, double sigma_x,
                                    double sigma_p, double hbar = 1.0);

/// Closed-form image of gaussian_phase_density: N(x; x0, σx) exp(i p0 y/ħ - σp² y²/2ħ²).
SuperDensity gaussian_super_density(const SuperGrid& grid, double x0, double p0, double sigma_x,
                                    double sigma_p, double hbar = 1.0);

/// ρ(Q,q) = ψ(Q) conj ψ(q)
SuperDensity pure_state_density(const SuperGrid& grid, const std::function<cplx(double)>& psi);

/// CSV (row per Q index, re/im interleaved columns) plus a JSON sidecar with grid and units.
void write_super_density(const std::filesystem::path& csv_path, const SuperDensity& rho,
                         double hbar = 1.0, double mass = 1.0);
SuperDensity read_super_density(const std::filesystem::path& csv_path);

}  // namespace superdyn
