#include "superdyn/liouvillian.hpp"

#include <fstream>
#include <iomanip>

#include "superdyn/errors.hpp"

namespace superdyn {

GridLiouvillian::GridLiouvillian(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                                 double mass, double hbar)
    : grid_(grid), kind_(kind), mass_(mass), hbar_(hbar), v_(v) {
  grid_.validate();
  if (!(mass > 0.0) || !(hbar > 0.0)) {
    raise(ErrorKind::InvalidArgument, "mass and hbar must be positive");
  }
  const int n = grid_.n;
  potential_diag_.resize(n, n);
  e_diag_ = MatrixXd::Zero(n, n);
  // ℰ is identically zero for at most quadratic potentials; keep it exactly zero.
  const bool has_e = kind_ == Dynamics::CL && !e_vanishes_identically(v_);
  for (int b = 0; b < n; ++b) {
    const double q = grid_.coord(b);
    for (int a = 0; a < n; ++a) {
      const double Q = grid_.coord(a);
      potential_diag_(a, b) = super_potential(v_, Dynamics::QM, Q, q);
      if (has_e) e_diag_(a, b) = e_superoperator(v_, Q, q);
    }
  }
  const VectorXd k = fft_wavenumbers(n, grid_.spacing());
  kinetic_ = (hbar_ * hbar_ / (2.0 * mass_)) * k.array().square().matrix();
}

MatrixXd GridLiouvillian::one_body_hamiltonian() const {
  const int n = grid_.n;
  MatrixXcd t = MatrixXcd::Identity(n, n);
  fft_columns(t, false);
  t = kinetic_.cast<cplx>().asDiagonal() * t;
  fft_columns(t, true);
  MatrixXd h = t.real();
  h = 0.5 * (h + h.transpose()).eval();
  for (int i = 0; i < n; ++i) h(i, i) += v_(grid_.coord(i));
  return h;
}

MatrixXcd GridLiouvillian::apply(const MatrixXcd& rho) const {
  const int n = grid_.n;
  if (rho.rows() != n || rho.cols() != n) {
    raise(ErrorKind::GridMismatch, "density shape does not match the Liouvillian grid");
  }
  // Kinetic part in the doubly transformed representation: (T_Q - T_q) → K(k_Q) - K(k_q).
  MatrixXcd modes = rho;
  fft2(modes, false);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) modes(a, b) *= kinetic_(a) - kinetic_(b);
  }
  fft2(modes, true);
  return modes + super_diagonal().cast<cplx>().cwiseProduct(rho);
}

MatrixXcd GridLiouvillian::dense() const {
  const Eigen::Index n = grid_.n;
  if (n * n > kMaxDenseDimension) {
    raise(ErrorKind::DimensionTooLarge, "dense grid Liouvillian of dimension " +
                                            std::to_string(n * n));
  }
  const MatrixXcd h = one_body_hamiltonian().cast<cplx>();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  MatrixXcd l(n * n, n * n);
  // vec(Hρ) = (I ⊗ H) vec ρ and vec(ρH) = (Hᵀ ⊗ I) vec ρ; H is real symmetric.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index m = 0; m < n; ++m) {
      l.block(j * n, m * n, n, n) = (j == m ? h : MatrixXcd::Zero(n, n)) - h(m, j) * id;
    }
  }
  const MatrixXd e = e_diag_;
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) l(a + n * b, a + n * b) += e(a, b);
  }
  return l;
}

GridLiouvillian build_grid_liouvillian(const PolynomialPotential& v, const SuperGrid& grid,
                                       Dynamics kind, double mass, double hbar) {
  return GridLiouvillian(v, grid, kind, mass, hbar);
}

BasisLiouvillian::BasisLiouvillian(MatrixXcd hamiltonian, std::optional<MatrixXcd> superoperator,
                                   double hermitian_tol)
    : h_(std::move(hamiltonian)), s_add_(std::move(superoperator)) {
  if (h_.rows() != h_.cols()) raise(ErrorKind::InvalidArgument, "Hamiltonian must be square");
  const double scale = h_.size() ? std::max(1.0, h_.cwiseAbs().maxCoeff()) : 1.0;
  if (hermiticity_deviation(h_) > hermitian_tol * scale) {
    raise(ErrorKind::NonHermitianInput,
          "Hamiltonian deviates from Hermitian by " + std::to_string(hermiticity_deviation(h_)));
  }
  const Eigen::Index dim = h_.rows() * h_.rows();
  if (s_add_ && (s_add_->rows() != dim || s_add_->cols() != dim)) {
    raise(ErrorKind::InvalidArgument, "superoperator must be N² × N²");
  }
}

MatrixXcd BasisLiouvillian::apply(const MatrixXcd& rho) const {
  MatrixXcd out = h_ * rho - rho * h_;
  if (s_add_) out += unvectorize(*s_add_ * vectorize(rho), rho.rows());
  return out;
}

MatrixXcd BasisLiouvillian::dense() const {
  const Eigen::Index n = h_.rows();
  if (n * n > kMaxDenseDimension) {
    raise(ErrorKind::DimensionTooLarge, "dense basis Liouvillian of dimension " +
                                            std::to_string(n * n));
  }
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  MatrixXcd l(n * n, n * n);
  // Row (j,k) = j + n k, column (l,m) = l + n m.
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) {
      l.block(k * n, m * n, n, n) = (k == m ? h_ : MatrixXcd::Zero(n, n)) - std::conj(h_(k, m)) * id;
    }
  }
  if (s_add_) l += *s_add_;
  return l;
}

BasisLiouvillian build_basis_liouvillian(const MatrixXcd& h, const std::optional<MatrixXcd>& s_add) {
  return BasisLiouvillian(h, s_add);
}

std::vector<cplx> spectrum(const GridLiouvillian& l) { return dense_spectrum(l.dense()); }
std::vector<cplx> spectrum(const BasisLiouvillian& l) { return dense_spectrum(l.dense()); }

double boundary_fraction(const SuperDensity& rho) {
  if (rho.values.size() == 0) return 0.0;
  const double peak = rho.values.cwiseAbs().maxCoeff();
  return peak > 0.0 ? boundary_magnitude(rho) / peak : 0.0;
}

void write_dense_csv(const std::filesystem::path& path, const MatrixXcd& op) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index c = 0; c < op.cols(); ++c) {
    out << (c == 0 ? "" : ",") << "re_" << c << ",im_" << c;
  }
  out << '\n';
  for (Eigen::Index r = 0; r < op.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      out << (c == 0 ? "" : ",") << op(r, c).real() << ',' << op(r, c).imag();
    }
    out << '\n';
  }
}

}  // namespace superdyn
