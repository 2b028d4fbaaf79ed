#include "superdyn/jaynescummings.hpp"

#include <cmath>

#include "superdyn/errors.hpp"
#include "superdyn/evolution.hpp"

namespace superdyn {

void JCParams::validate() const {
  if (n_max < 1) raise(ErrorKind::InvalidArgument, "JC needs n_max >= 1");
  if (!std::isfinite(omega_e) || !std::isfinite(omega) || !std::isfinite(d_eg)) {
    raise(ErrorKind::InvalidArgument, "JC parameters must be finite");
  }
}

MatrixXcd annihilation(int n_max) {
  MatrixXcd a = MatrixXcd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

MatrixXcd build_jc_hamiltonian(const JCParams& p) {
  p.validate();
  const int f = p.fock_dim();
  MatrixXcd h = MatrixXcd::Zero(p.dim(), p.dim());
  for (int atom = 0; atom < 2; ++atom) {
    for (int n = 0; n < f; ++n) {
      h(jc_index(atom, n, p.n_max), jc_index(atom, n, p.n_max)) =
          (atom == kExcited ? p.omega_e : 0.0) + p.omega * (n + 0.5);
    }
  }
  // i d a|e⟩⟨g|: ⟨e,n|·|g,n+1⟩ = i d √(n+1); the Hermitian partner sits at ⟨g,n+1|·|e,n⟩.
  for (int n = 0; n + 1 < f; ++n) {
    const cplx element = kI * p.d_eg * std::sqrt(n + 1.0);
    h(jc_index(kExcited, n, p.n_max), jc_index(kGround, n + 1, p.n_max)) = element;
    h(jc_index(kGround, n + 1, p.n_max), jc_index(kExcited, n, p.n_max)) = std::conj(element);
  }
  return h;
}

MatrixXcd build_multilevel_hamiltonian(const std::vector<double>& levels, const MatrixXd& dipoles,
                                       double omega, int n_max, bool rotating_wave) {
  const int n_levels = static_cast<int>(levels.size());
  if (n_levels < 1 || n_max < 1) raise(ErrorKind::InvalidArgument, "need levels and n_max >= 1");
  if (dipoles.rows() != n_levels || dipoles.cols() != n_levels) {
    raise(ErrorKind::InvalidArgument, "dipole matrix must be levels × levels");
  }
  const double scale = std::max(1.0, dipoles.cwiseAbs().maxCoeff());
  if ((dipoles - dipoles.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    raise(ErrorKind::NonHermitianAssembly, "dipole matrix must satisfy d_ij = d_ji");
  }
  const int f = n_max + 1;
  const MatrixXcd a = annihilation(n_max);
  const MatrixXcd ad = a.adjoint();
  MatrixXcd h = MatrixXcd::Zero(n_levels * f, n_levels * f);
  for (int i = 0; i < n_levels; ++i) {
    for (int n = 0; n < f; ++n) h(i * f + n, i * f + n) = levels[i] + omega * (n + 0.5);
  }
  for (int i = 0; i < n_levels; ++i) {
    for (int j = 0; j < n_levels; ++j) {
      if (i == j || dipoles(i, j) == 0.0) continue;
      MatrixXcd field = a - ad;
      if (rotating_wave) {
        if (levels[i] > levels[j]) field = a;
        else if (levels[i] < levels[j]) field = -ad;
      }
      h.block(i * f, j * f, f, f) += kI * dipoles(i, j) * field;
    }
  }
  if (hermiticity_deviation(h) > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    raise(ErrorKind::NonHermitianAssembly, "assembled multilevel Hamiltonian is not Hermitian");
  }
  return h;
}

AtomSuperoperator jc_atom_superoperator(const JCParams& p) {
  AtomSuperoperator e{};
  const int g = kGround, x = kExcited;
  e[x][g][x][g] = p.eps_egeg;
  e[g][x][g][x] = -std::conj(p.eps_egeg);
  e[x][x][g][g] = p.eps_eegg;
  e[g][g][x][x] = -std::conj(p.eps_eegg);
  return e;
}

MatrixXcd jc_superoperator_matrix(const JCParams& p) {
  p.validate();
  const int f = p.fock_dim();
  const int dim = p.dim();
  const AtomSuperoperator e = jc_atom_superoperator(p);
  MatrixXcd s = MatrixXcd::Zero(dim * dim, dim * dim);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          if (e[a][b][c][d] == 0.0) continue;
          for (int n = 0; n < f; ++n)
            for (int np = 0; np < f; ++np) {
              const int row = jc_index(a, n, p.n_max) + dim * jc_index(b, np, p.n_max);
              const int col = jc_index(c, n, p.n_max) + dim * jc_index(d, np, p.n_max);
              s(row, col) += e[a][b][c][d];
            }
        }
  return s;
}

MatrixXcd jc_liouvillian(const JCParams& p) {
  const MatrixXcd h = build_jc_hamiltonian(p);
  return BasisLiouvillian(h, jc_superoperator_matrix(p)).dense();
}

double top_fock_population(const MatrixXcd& rho, int n_max) {
  double pop = 0.0;
  for (int atom = 0; atom < 2; ++atom) {
    for (int n = std::max(0, n_max - 1); n <= n_max; ++n) {
      const int i = jc_index(atom, n, n_max);
      pop += rho(i, i).real();
    }
  }
  return pop;
}

void check_truncation(const MatrixXcd& rho, int n_max, double limit) {
  const double pop = top_fock_population(rho, n_max);
  if (pop > limit) {
    raise(ErrorKind::TruncationLeak,
          "top two Fock levels hold population " + std::to_string(pop) + "; raise n_max");
  }
}

std::vector<MatrixXcd> jc_evolve_exact_series(const JCParams& p, const MatrixXcd& rho0,
                                              const std::vector<double>& times,
                                              bool guard_truncation) {
  p.validate();
  if (rho0.rows() != p.dim() || rho0.cols() != p.dim()) {
    raise(ErrorKind::InvalidArgument, "JC density has the wrong dimension");
  }
  const ExactPropagator u(jc_liouvillian(p));
  std::vector<MatrixXcd> out;
  out.reserve(times.size());
  for (double t : times) {
    out.push_back(t == 0.0 ? rho0 : u.apply(rho0, t));
    if (guard_truncation) check_truncation(out.back(), p.n_max);
  }
  return out;
}

MatrixXcd jc_evolve_exact(const JCParams& p, const MatrixXcd& rho0, double t, bool guard_truncation) {
  return jc_evolve_exact_series(p, rho0, {t}, guard_truncation).front();
}

FactorizedState factorize(const MatrixXcd& rho, int n_max, double* residual) {
  const int f = n_max + 1;
  if (rho.rows() != 2 * f || rho.cols() != 2 * f) {
    raise(ErrorKind::InvalidArgument, "JC density has the wrong dimension");
  }
  FactorizedState s;
  s.atom.setZero();
  s.field = MatrixXcd::Zero(f, f);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int n = 0; n < f; ++n) s.atom(a, b) += rho(jc_index(a, n, n_max), jc_index(b, n, n_max));
    }
    s.field += rho.block(a * f, a * f, f, f);
  }
  const cplx tr = s.atom.trace();
  if (std::abs(tr) > 0.0) s.atom /= tr;
  if (residual) *residual = (rho - jc_product_state(s.atom, s.field)).cwiseAbs().maxCoeff();
  return s;
}

MatrixXcd jc_product_state(const Eigen::Matrix2cd& atom, const MatrixXcd& field) {
  const Eigen::Index f = field.rows();
  MatrixXcd out(2 * f, 2 * f);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out.block(a * f, b * f, f, f) = atom(a, b) * field;
  return out;
}

MatrixXcd jc_evolve_first_order(const JCParams& p, const MatrixXcd& rho0, double t) {
  p.validate();
  double residual = 0.0;
  const FactorizedState s = factorize(rho0, p.n_max, &residual);
  if (residual > 1e-10) {
    raise(ErrorKind::NotFactorized,
          "initial state is not atom ⊗ field (residual " + std::to_string(residual) + ")");
  }
  const int f = p.fock_dim();
  const auto& A = s.atom;
  auto F = [&](int n, int np) -> cplx {
    return (n < 0 || np < 0 || n >= f || np >= f) ? cplx(0.0) : s.field(n, np);
  };
  const AtomSuperoperator e = jc_atom_superoperator(p);
  const int g = kGround, x = kExcited;
  const double d = p.d_eg;
  auto energy = [&](int atom, int n) { return (atom == x ? p.omega_e : 0.0) + p.omega * (n + 0.5); };

  MatrixXcd out(p.dim(), p.dim());
  for (int n = 0; n < f; ++n) {
    for (int np = 0; np < f; ++np) {
      const double sn = std::sqrt(static_cast<double>(n)), sn1 = std::sqrt(n + 1.0);
      const double snp = std::sqrt(static_cast<double>(np)), snp1 = std::sqrt(np + 1.0);
      const cplx f0 = F(n, np);

      const cplx eg = (1.0 - kI * t * e[x][g][x][g]) * A(x, g) * f0 +
                      d * t * (sn1 * A(g, g) * F(n + 1, np) - snp * A(x, x) * F(n, np - 1));
      const cplx ge = (1.0 - kI * t * e[g][x][g][x]) * A(g, x) * f0 -
                      d * t * (sn * A(x, x) * F(n - 1, np) - snp1 * A(g, g) * F(n, np + 1));
      const cplx gg = A(g, g) * f0 - kI * t * e[g][g][x][x] * A(x, x) * f0 -
                      d * t * (sn * A(x, g) * F(n - 1, np) + snp * A(g, x) * F(n, np - 1));
      const cplx ee = A(x, x) * f0 - kI * t * e[x][x][g][g] * A(g, g) * f0 +
                      d * t * (sn1 * A(g, x) * F(n + 1, np) + snp1 * A(x, g) * F(n, np + 1));

      const std::array<std::pair<std::pair<int, int>, cplx>, 4> blocks{
          {{{x, g}, eg}, {{g, x}, ge}, {{g, g}, gg}, {{x, x}, ee}}};
      for (const auto& [ab, value] : blocks) {
        const auto [a, b] = ab;
        const cplx phase = std::exp(-kI * t * (energy(a, n) - energy(b, np)));
        out(jc_index(a, n, p.n_max), jc_index(b, np, p.n_max)) = phase * value;
      }
    }
  }
  return out;
}

MatrixXcd fock_density(int n, int n_max) {
  if (n < 0 || n > n_max) raise(ErrorKind::InvalidArgument, "Fock level outside truncation");
  MatrixXcd rho = MatrixXcd::Zero(n_max + 1, n_max + 1);
  rho(n, n) = 1.0;
  return rho;
}

MatrixXcd coherent_density(cplx alpha, int n_max) {
  VectorXcd c(n_max + 1);
  c(0) = 1.0;
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  c.normalize();
  return c * c.adjoint();
}

double excited_population(const MatrixXcd& rho, int n_max) {
  double pop = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const int i = jc_index(kExcited, n, n_max);
    pop += rho(i, i).real();
  }
  return pop;
}

cplx coherence_eg00(const MatrixXcd& rho, int n_max) {
  return rho(jc_index(kExcited, 0, n_max), jc_index(kGround, 0, n_max));
}

}  // namespace superdyn
