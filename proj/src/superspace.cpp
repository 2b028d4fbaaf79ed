#include "superdyn/superspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "superdyn/errors.hpp"

namespace superdyn {

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

void require_hermitian(const SuperDensity& rho, double tol) {
  const double dev = hermiticity_deviation(rho);
  if (dev > tol) {
    raise(ErrorKind::HermiticityViolation,
          "max |rho(Q,q) - conj rho(q,Q)| = " + std::to_string(dev));
  }
}

double gaussian(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

// y_k = k Δy for k in [-n_p/2, n_p/2); storage column c = k + n_p/2.
int y_index(int column, int n_p) { return column - n_p / 2; }

}  // namespace

void PhaseGrid::validate() const {
  if (n_x < 2 || n_p < 2 || n_x % 2 != 0 || n_p % 2 != 0) {
    raise(ErrorKind::GridMismatch, "phase grid sizes must be positive and even");
  }
  if (!(x_max > x_min) || !(p_max > p_min)) {
    raise(ErrorKind::GridMismatch, "phase grid bounds must be increasing");
  }
}

PhaseGrid PhaseGrid::reciprocal(double x_min, double x_max, int n_x, int n_p, double p_center,
                                double hbar) {
  PhaseGrid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n_x = n_x;
  g.n_p = n_p;
  const double dx = (x_max - x_min) / n_x;
  const double dp = 2.0 * kPi * hbar / (n_p * dx);
  g.p_min = p_center - 0.5 * n_p * dp;
  g.p_max = p_center + 0.5 * n_p * dp;
  g.validate();
  return g;
}

void SuperGrid::validate() const {
  if (n < 2 || n % 2 != 0) raise(ErrorKind::GridMismatch, "superspace grid size must be even");
  if (!(max > min)) raise(ErrorKind::GridMismatch, "superspace grid bounds must be increasing");
}

SuperGrid super_grid_for(const PhaseGrid& grid) {
  SuperGrid g;
  g.min = grid.x_min;
  g.max = grid.x_max;
  g.n = grid.n_x;
  return g;
}

SuperDensity phase_to_super(const PhaseDensity& rho, double hbar) {
  const PhaseGrid& grid = rho.grid;
  grid.validate();
  if (rho.values.rows() != grid.n_x || rho.values.cols() != grid.n_p) {
    raise(ErrorKind::GridMismatch, "phase density shape does not match its grid");
  }
  const double dx = grid.dx();
  const double dp = grid.dp();
  if (!close_rel(dx * dp, 2.0 * kPi * hbar / grid.n_p, 1e-9)) {
    raise(ErrorKind::GridMismatch, "phase grid violates dx*dp = 2*pi*hbar/n_p");
  }
  const int n = grid.n_x;
  const int n_p = grid.n_p;

  // ρ(x_i, y_k) = (Δp/2πħ) Σ_j e^{i p_j y_k/ħ} ρ(x_i, p_j), with y_k = k Δx.
  MatrixXcd spectrum = rho.values.cast<cplx>();
  fft_rows(spectrum, /*inverse=*/true);  // (1/n_p) Σ_j e^{+2πi jk/n_p}
  const double prefactor = dp * n_p / (2.0 * kPi * hbar);
  MatrixXcd rho_xy = MatrixXcd::Zero(n, n_p);
  for (int c = 1; c < n_p; ++c) {  // column 0 (k = -n_p/2) has no Hermitian partner
    const int k = y_index(c, n_p);
    const double y = k * dx;
    const int wrapped = ((k % n_p) + n_p) % n_p;
    const cplx phase = prefactor * std::exp(kI * grid.p_min * y / hbar);
    rho_xy.col(c) = phase * spectrum.col(wrapped);
  }

  SuperDensity out;
  out.grid = super_grid_for(grid);
  out.values = MatrixXcd::Zero(n, n);
  for (int c = 1; c < n_p; ++c) {
    const int k = y_index(c, n_p);
    if (std::abs(k) >= n) continue;
    // g_k(Q) = ρ(Q - y_k/2, y_k)
    const VectorXcd g = spectral_shift(rho_xy.col(c), dx, 0.5 * k * dx);
    for (int a = std::max(0, k); a < std::min(n, n + k); ++a) out.values(a, a - k) = g(a);
  }
  return out;
}

PhaseDensity super_to_phase(const SuperDensity& rho, const PhaseGrid& target, double hbar,
                            double hermiticity_tol) {
  target.validate();
  rho.grid.validate();
  const int n = rho.grid.n;
  if (target.n_x != n || !close_rel(target.x_min, rho.grid.min, 1e-12) ||
      !close_rel(target.x_max, rho.grid.max, 1e-12)) {
    raise(ErrorKind::GridMismatch, "phase grid x axis does not match the superspace grid");
  }
  const double dx = target.dx();
  const double dp = target.dp();
  if (!close_rel(dx * dp, 2.0 * kPi * hbar / target.n_p, 1e-9)) {
    raise(ErrorKind::GridMismatch, "phase grid violates dx*dp = 2*pi*hbar/n_p");
  }
  require_hermitian(rho, hermiticity_tol);
  const int n_p = target.n_p;

  // h(x_i, k) = Δy e^{-i p_min y_k/ħ} ρ(x_i, y_k), then DFT over k.
  MatrixXcd h = MatrixXcd::Zero(n, n_p);
  for (int c = 1; c < n_p; ++c) {
    const int k = y_index(c, n_p);
    if (std::abs(k) >= n) continue;
    VectorXcd g = VectorXcd::Zero(n);
    for (int a = std::max(0, k); a < std::min(n, n + k); ++a) g(a) = rho.values(a, a - k);
    // ρ(x, y_k) = g_k(x + y_k/2)
    const VectorXcd f = spectral_shift(g, dx, -0.5 * k * dx);
    const double y = k * dx;
    const int wrapped = ((k % n_p) + n_p) % n_p;
    h.col(wrapped) = dx * std::exp(-kI * target.p_min * y / hbar) * f;
  }
  fft_rows(h, /*inverse=*/false);  // Σ_k e^{-2πi jk/n_p}

  PhaseDensity out;
  out.grid = target;
  out.values = h.real();
  return out;
}

double trace(const SuperDensity& rho) {
  return rho.values.diagonal().sum().real() * rho.grid.spacing();
}

double expect_x(const SuperDensity& rho, double hermiticity_tol) {
  require_hermitian(rho, hermiticity_tol);
  double acc = 0.0;
  for (int i = 0; i < rho.grid.n; ++i) acc += rho.grid.coord(i) * rho.values(i, i).real();
  return acc * rho.grid.spacing();
}

double expect_x2(const SuperDensity& rho, double hermiticity_tol) {
  require_hermitian(rho, hermiticity_tol);
  double acc = 0.0;
  for (int i = 0; i < rho.grid.n; ++i) {
    const double x = rho.grid.coord(i);
    acc += x * x * rho.values(i, i).real();
  }
  return acc * rho.grid.spacing();
}

namespace {

/// -iħ ∂_Q acting on the left (row) index of every column.
MatrixXcd momentum_left(const MatrixXcd& m, double dx, double hbar) {
  MatrixXcd out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out.col(j) = -kI * hbar * spectral_derivative(m.col(j), dx, 1, 2);
  }
  return out;
}

}  // namespace

double expect_p(const SuperDensity& rho, double hbar, double hermiticity_tol) {
  require_hermitian(rho, hermiticity_tol);
  const int n = rho.grid.n;
  const double dx = rho.grid.spacing();
  cplx acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const VectorXcd d_bra = spectral_derivative(rho.values.col(i), dx, 1, 2);
    const VectorXcd d_ket = spectral_derivative(rho.values.row(i).transpose(), dx, 1, 2);
    acc += -kI * 0.5 * hbar * (d_bra(i) - d_ket(i));
  }
  return acc.real() * dx;
}

double expect_xp_weyl(const SuperDensity& rho, double hbar, double hermiticity_tol) {
  require_hermitian(rho, hermiticity_tol);
  const int n = rho.grid.n;
  const double dx = rho.grid.spacing();
  VectorXd positions(n);
  for (int i = 0; i < n; ++i) positions(i) = rho.grid.coord(i);

  const MatrixXcd p_rho = momentum_left(rho.values, dx, hbar);
  const MatrixXcd xp_rho = positions.asDiagonal() * p_rho;
  const MatrixXcd px_rho = momentum_left(positions.asDiagonal() * rho.values, dx, hbar);
  return 0.5 * (xp_rho + px_rho).diagonal().sum().real() * dx;
}

double purity(const SuperDensity& rho) {
  const double dx = rho.grid.spacing();
  return rho.values.cwiseAbs2().sum() * dx * dx;
}

std::vector<double> spectrum_report(const SuperDensity& rho, double hermiticity_tol) {
  require_hermitian(rho, hermiticity_tol);
  const MatrixXcd op = 0.5 * (rho.values + rho.values.adjoint()) * rho.grid.spacing();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(op, Eigen::EigenvaluesOnly);
  std::vector<double> evals(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(evals.begin(), evals.end(), std::greater<>());
  return evals;
}

double hermiticity_deviation(const SuperDensity& rho) {
  return hermiticity_deviation(rho.values);
}

double boundary_magnitude(const SuperDensity& rho) {
  const auto& v = rho.values;
  const Eigen::Index n = v.rows();
  if (n == 0) return 0.0;
  double worst = 0.0;
  worst = std::max(worst, v.row(0).cwiseAbs().maxCoeff());
  worst = std::max(worst, v.row(n - 1).cwiseAbs().maxCoeff());
  worst = std::max(worst, v.col(0).cwiseAbs().maxCoeff());
  worst = std::max(worst, v.col(n - 1).cwiseAbs().maxCoeff());
  return worst;
}

PhaseMoments phase_moments(const PhaseDensity& rho, double hbar) {
  PhaseMoments m;
  const auto& g = rho.grid;
  const double w = g.dx() * g.dp() / (2.0 * kPi * hbar);
  for (int i = 0; i < g.n_x; ++i) {
    const double x = g.x(i);
    for (int j = 0; j < g.n_p; ++j) {
      const double p = g.p(j);
      const double r = rho.values(i, j) * w;
      m.norm += r;
      m.x += x * r;
      m.p += p * r;
      m.x2 += x * x * r;
      m.p2 += p * p * r;
      m.xp += x * p * r;
    }
  }
  return m;
}

PhaseDensity gaussian_phase_density(const PhaseGrid& grid, double x0, double p0, double sigma_x,
                                    double sigma_p, double hbar) {
  grid.validate();
  PhaseDensity out;
  out.grid = grid;
  out.values.resize(grid.n_x, grid.n_p);
  for (int i = 0; i < grid.n_x; ++i) {
    for (int j = 0; j < grid.n_p; ++j) {
      out.values(i, j) = 2.0 * kPi * hbar * gaussian(grid.x(i), x0, sigma_x) *
                         gaussian(grid.p(j), p0, sigma_p);
    }
  }
  return out;
}

SuperDensity gaussian_super_density(const SuperGrid& grid, double x0, double p0, double sigma_x,
                                    double sigma_p, double hbar) {
  grid.validate();
  SuperDensity out;
  out.grid = grid;
  out.values.resize(grid.n, grid.n);
  for (int a = 0; a < grid.n; ++a) {
    for (int b = 0; b < grid.n; ++b) {
      const double Q = grid.coord(a), q = grid.coord(b);
      const double x = 0.5 * (Q + q), y = Q - q;
      out.values(a, b) = gaussian(x, x0, sigma_x) *
                         std::exp(kI * p0 * y / hbar - 0.5 * sigma_p * sigma_p * y * y / (hbar * hbar));
    }
  }
  return out;
}

SuperDensity pure_state_density(const SuperGrid& grid, const std::function<cplx(double)>& psi) {
  grid.validate();
  VectorXcd v(grid.n);
  for (int i = 0; i < grid.n; ++i) v(i) = psi(grid.coord(i));
  SuperDensity out;
  out.grid = grid;
  out.values = v * v.adjoint();
  return out;
}

void write_super_density(const std::filesystem::path& csv_path, const SuperDensity& rho,
                         double hbar, double mass) {
  std::ofstream csv(csv_path);
  if (!csv) raise(ErrorKind::InvalidArgument, "cannot write " + csv_path.string());
  csv << std::setprecision(17);
  const int n = rho.grid.n;
  for (int b = 0; b < n; ++b) {
    csv << (b == 0 ? "" : ",") << "re_q" << b << ",im_q" << b;
  }
  csv << '\n';
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      csv << (b == 0 ? "" : ",") << rho.values(a, b).real() << ',' << rho.values(a, b).imag();
    }
    csv << '\n';
  }

  nlohmann::json meta = {{"format", "superdensity-csv"},
                         {"rows", "Q index"},
                         {"columns", "re/im interleaved per q index"},
                         {"grid", {{"min", rho.grid.min}, {"max", rho.grid.max}, {"n", n}}},
                         {"hbar", hbar},
                         {"mass", mass}};
  std::filesystem::path sidecar = csv_path;
  sidecar += ".json";
  std::ofstream(sidecar) << meta.dump(2) << '\n';
}

SuperDensity read_super_density(const std::filesystem::path& csv_path) {
  std::filesystem::path sidecar = csv_path;
  sidecar += ".json";
  std::ifstream meta_in(sidecar);
  if (!meta_in) raise(ErrorKind::ParseError, "missing sidecar " + sidecar.string());
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  SuperDensity rho;
  rho.grid.min = meta.at("grid").at("min").get<double>();
  rho.grid.max = meta.at("grid").at("max").get<double>();
  rho.grid.n = meta.at("grid").at("n").get<int>();
  rho.grid.validate();
  const int n = rho.grid.n;
  rho.values.resize(n, n);

  std::ifstream csv(csv_path);
  std::string line;
  std::getline(csv, line);  // header
  for (int a = 0; a < n; ++a) {
    if (!std::getline(csv, line)) raise(ErrorKind::ParseError, "truncated density CSV");
    std::stringstream row(line);
    std::string cell;
    for (int b = 0; b < n; ++b) {
      double re = 0.0, im = 0.0;
      if (!std::getline(row, cell, ',')) raise(ErrorKind::ParseError, "short density row");
      re = std::stod(cell);
      if (!std::getline(row, cell, ',')) raise(ErrorKind::ParseError, "short density row");
      im = std::stod(cell);
      rho.values(a, b) = {re, im};
    }
  }
  return rho;
}

}  // namespace superdyn
