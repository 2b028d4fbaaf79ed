#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace superdyn {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Largest dense superoperator dimension (N² of the vectorized state) handled by dense routines.
inline constexpr Eigen::Index kMaxDenseDimension = 4096;

/// max |A - A^†|
double hermiticity_deviation(const MatrixXcd& a);

/// Column-major vectorization, vec(ρ)[i + n j] = ρ(i, j).
VectorXcd vectorize(const MatrixXcd& rho);
MatrixXcd unvectorize(const VectorXcd& v, Eigen::Index rows);

/// Dense exp(-i G s) for a fixed generator G and arbitrary s.
///
/// Hermitian generators are diagonalized once and every call is exact up to the
/// eigensolver accuracy. Other generators fall back to scaling-and-squaring Padé.
class DenseExponential {
 public:
  explicit DenseExponential(MatrixXcd generator, double hermitian_tol = 1e-12);

  bool hermitian() const { return hermitian_; }
  Eigen::Index dimension() const { return generator_.rows(); }

  /// exp(-i G s) v
  VectorXcd apply(const VectorXcd& v, double s) const;
  /// exp(-i G s)
  MatrixXcd matrix(double s) const;

  const VectorXd& eigenvalues() const { return evals_; }

 private:
  MatrixXcd generator_;
  bool hermitian_ = false;
  VectorXd evals_;
  MatrixXcd evecs_;
};

/// exp(A) for a general complex matrix (Padé with scaling and squaring).
MatrixXcd expm(const MatrixXcd& a);

/// Eigenvalues of a dense complex matrix, using the Hermitian solver when applicable.
std::vector<cplx> dense_spectrum(const MatrixXcd& a, double hermitian_tol = 1e-12);

/// Greedy pairing of each eigenvalue λ with an unused λ' ≈ -λ.
/// Returns the largest pairing distance divided by max(1, spectral radius).
double spectral_negation_mismatch(std::span<const cplx> eigenvalues);

// ---------------------------------------------------------------------------
// Periodic spectral helpers (FFT backed).

/// Angular wavenumbers in FFT order for n points with spacing dx.
VectorXd fft_wavenumbers(Eigen::Index n, double dx);

void fft_columns(MatrixXcd& m, bool inverse);
void fft_rows(MatrixXcd& m, bool inverse);
void fft2(MatrixXcd& m, bool inverse);

/// d^order/dx^order of periodic samples, computed on a zero-padded copy of length pad*n.
VectorXcd spectral_derivative(const VectorXcd& f, double dx, int order, int pad = 1);

/// Band-limited periodic translation: g(x_i) = f(x_i - shift).
/// The Nyquist mode uses the real (cosine) kernel so real inputs stay real.
VectorXcd spectral_shift(const VectorXcd& f, double dx, double shift);

// ---------------------------------------------------------------------------
// Quadrature.

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Adaptive Gauss–Kronrod (7/15) for a complex integrand on [a, b].
QuadratureResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol = 0.0, int max_intervals = 2000);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Probabilists' Gauss–Hermite rule: Σ w_i f(z_i) ≈ E[f(Z)], Z ~ N(0, 1).
GaussRule gauss_hermite(int n);

/// Gauss–Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

// ---------------------------------------------------------------------------
// Random numbers.

/// SplitMix64 mixing of (seed, stream) into an engine seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Independent engine for block `stream` of a run seeded with `seed`.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(stream_seed(seed, stream));
}

}  // namespace superdyn
