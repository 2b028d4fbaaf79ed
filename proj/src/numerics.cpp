#include "superdyn/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "superdyn/errors.hpp"

namespace superdyn {

double hermiticity_deviation(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

VectorXcd vectorize(const MatrixXcd& rho) {
  return Eigen::Map<const VectorXcd>(rho.data(), rho.size());
}

MatrixXcd unvectorize(const VectorXcd& v, Eigen::Index rows) {
  const Eigen::Index cols = rows == 0 ? 0 : v.size() / rows;
  return Eigen::Map<const MatrixXcd>(v.data(), rows, cols);
}

DenseExponential::DenseExponential(MatrixXcd generator, double hermitian_tol)
    : generator_(std::move(generator)) {
  if (generator_.rows() != generator_.cols()) {
    raise(ErrorKind::InvalidArgument, "generator must be square");
  }
  if (generator_.rows() > kMaxDenseDimension) {
    raise(ErrorKind::DimensionTooLarge,
          "dense exponential of dimension " + std::to_string(generator_.rows()));
  }
  const double scale = std::max(1.0, generator_.cwiseAbs().maxCoeff());
  hermitian_ = hermiticity_deviation(generator_) <= hermitian_tol * scale;
  if (hermitian_) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(generator_);
    evals_ = solver.eigenvalues();
    evecs_ = solver.eigenvectors();
  }
}

VectorXcd DenseExponential::apply(const VectorXcd& v, double s) const {
  if (hermitian_) {
    VectorXcd coeffs = evecs_.adjoint() * v;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
      coeffs(k) *= std::exp(-kI * evals_(k) * s);
    }
    return evecs_ * coeffs;
  }
  return matrix(s) * v;
}

MatrixXcd DenseExponential::matrix(double s) const {
  if (hermitian_) {
    VectorXcd phases(evals_.size());
    for (Eigen::Index k = 0; k < evals_.size(); ++k) phases(k) = std::exp(-kI * evals_(k) * s);
    return evecs_ * phases.asDiagonal() * evecs_.adjoint();
  }
  return expm(MatrixXcd(-kI * s * generator_));
}

MatrixXcd expm(const MatrixXcd& a) { return a.exp(); }

std::vector<cplx> dense_spectrum(const MatrixXcd& a, double hermitian_tol) {
  std::vector<cplx> out;
  if (a.size() == 0) return out;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermiticity_deviation(a) <= hermitian_tol * scale) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.emplace_back(solver.eigenvalues()(i), 0.0);
  } else {
    Eigen::ComplexEigenSolver<MatrixXcd> solver(a, false);
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(solver.eigenvalues()(i));
  }
  return out;
}

double spectral_negation_mismatch(std::span<const cplx> eigenvalues) {
  const std::size_t n = eigenvalues.size();
  double radius = 0.0;
  for (const auto& z : eigenvalues) radius = std::max(radius, std::abs(z));
  if (radius == 0.0) return 0.0;

  // Pair largest magnitudes first so near-zero eigenvalues cannot steal partners.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(eigenvalues[a]) > std::abs(eigenvalues[b]);
  });

  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (std::size_t idx : order) {
    if (used[idx]) continue;
    used[idx] = true;
    std::size_t best = n;
    double best_dist = std::abs(2.0 * eigenvalues[idx]);  // self pairing, only good at zero
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(eigenvalues[idx] + eigenvalues[j]);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best != n) used[best] = true;
    worst = std::max(worst, best_dist);
  }
  return worst / radius;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

}  // namespace

VectorXd fft_wavenumbers(Eigen::Index n, double dx) {
  VectorXd k(n);
  const double dk = 2.0 * kPi / (static_cast<double>(n) * dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i) = (i < (n + 1) / 2 ? static_cast<double>(i) : static_cast<double>(i - n)) * dk;
  }
  return k;
}

void fft_columns(MatrixXcd& m, bool inverse) {
  auto& fft = fft_engine();
  VectorXcd in(m.rows()), out(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    in = m.col(j);
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
    m.col(j) = out;
  }
}

void fft_rows(MatrixXcd& m, bool inverse) {
  auto& fft = fft_engine();
  VectorXcd in(m.cols()), out(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    in = m.row(i).transpose();
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
    m.row(i) = out.transpose();
  }
}

void fft2(MatrixXcd& m, bool inverse) {
  fft_columns(m, inverse);
  fft_rows(m, inverse);
}

VectorXcd spectral_derivative(const VectorXcd& f, double dx, int order, int pad) {
  const Eigen::Index n = f.size();
  const Eigen::Index m = n * std::max(1, pad);
  VectorXcd padded = VectorXcd::Zero(m);
  padded.head(n) = f;
  VectorXcd modes(m), out(m);
  auto& fft = fft_engine();
  fft.fwd(modes, padded);
  const VectorXd k = fft_wavenumbers(m, dx);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (m % 2 == 0 && i == m / 2 && order % 2 == 1) {
      modes(i) = 0.0;
      continue;
    }
    modes(i) *= std::pow(kI * k(i), order);
  }
  fft.inv(out, modes);
  return out.head(n);
}

VectorXcd spectral_shift(const VectorXcd& f, double dx, double shift) {
  const Eigen::Index n = f.size();
  VectorXcd modes(n), out(n);
  auto& fft = fft_engine();
  fft.fwd(modes, f);
  const VectorXd k = fft_wavenumbers(n, dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (n % 2 == 0 && i == n / 2) {
      modes(i) *= std::cos(k(i) * shift);
    } else {
      modes(i) *= std::exp(-kI * k(i) * shift);
    }
  }
  fft.inv(out, modes);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b;
  cplx value;
  double error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

Interval gauss_kronrod(const std::function<cplx(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const cplx fc = f(center);
  cplx kronrod = fc * kWgk[7];
  cplx gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const cplx sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

GaussRule golub_welsch(const VectorXd& off_diagonal, double total_mass) {
  const Eigen::Index n = off_diagonal.size() + 1;
  MatrixXd jacobi = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off_diagonal(i);
    jacobi(i + 1, i) = off_diagonal(i);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(jacobi);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = total_mass * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol, int max_intervals) {
  std::priority_queue<Interval> heap;
  Interval first = gauss_kronrod(f, a, b);
  cplx total = first.value;
  double error = first.error;
  heap.push(first);
  int evaluations = 15;
  int intervals = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Interval left = gauss_kronrod(f, worst.a, mid);
    Interval right = gauss_kronrod(f, mid, worst.b);
    evaluations += 30;
    ++intervals;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  cplx sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  QuadratureResult result;
  result.value = sum;
  result.error_estimate = err;
  result.evaluations = evaluations;
  result.converged = err <= std::max(abs_tol, rel_tol * std::abs(sum));
  return result;
}

GaussRule gauss_hermite(int n) {
  if (n < 1) raise(ErrorKind::InvalidArgument, "Gauss-Hermite order must be positive");
  VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  return golub_welsch(off, 1.0);
}

GaussRule gauss_legendre(int n) {
  if (n < 1) raise(ErrorKind::InvalidArgument, "Gauss-Legendre order must be positive");
  VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    off(k - 1) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  return golub_welsch(off, 2.0);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace superdyn
