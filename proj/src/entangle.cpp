#include "superdyn/entangle.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "superdyn/errors.hpp"
#include "superdyn/evolution.hpp"

namespace superdyn {

void BipartiteBasis::validate() const {
  if (n_levels < 2) raise(ErrorKind::InvalidArgument, "bipartite basis needs n_levels >= 2");
  if (!(omega > 0.0) || !(mass > 0.0) || !(hbar > 0.0)) {
    raise(ErrorKind::InvalidArgument, "omega, mass and hbar must be positive");
  }
  const Eigen::Index liouville = static_cast<Eigen::Index>(dim()) * dim();
  if (liouville > kMaxDenseDimension) {
    raise(ErrorKind::DimensionTooLarge,
          "bipartite Liouville dimension " + std::to_string(liouville) + " is too large");
  }
}

MatrixXcd position_operator(const BipartiteBasis& basis) {
  const int n = basis.n_levels;
  MatrixXcd x = MatrixXcd::Zero(n, n);
  const double scale = std::sqrt(basis.hbar / (2.0 * basis.mass * basis.omega));
  for (int k = 1; k < n; ++k) {
    x(k - 1, k) = x(k, k - 1) = scale * std::sqrt(static_cast<double>(k));
  }
  return x;
}

MatrixXcd position_operator_1(const BipartiteBasis& basis) {
  const MatrixXcd id = MatrixXcd::Identity(basis.n_levels, basis.n_levels);
  return Eigen::kroneckerProduct(position_operator(basis), id).eval();
}

MatrixXcd position_operator_2(const BipartiteBasis& basis) {
  const MatrixXcd id = MatrixXcd::Identity(basis.n_levels, basis.n_levels);
  return Eigen::kroneckerProduct(id, position_operator(basis)).eval();
}

MatrixXcd bipartite_free_hamiltonian(const BipartiteBasis& basis) {
  const int n = basis.n_levels;
  MatrixXcd h = MatrixXcd::Zero(basis.dim(), basis.dim());
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      h(i1 * n + i2, i1 * n + i2) = basis.hbar * basis.omega * (i1 + i2 + 1.0);
    }
  }
  return h;
}

namespace {

/// Powers X^0 … X^max_power of a matrix.
std::vector<MatrixXcd> powers(const MatrixXcd& x, int max_power) {
  std::vector<MatrixXcd> out{MatrixXcd::Identity(x.rows(), x.cols())};
  for (int k = 1; k <= max_power; ++k) out.push_back(out.back() * x);
  return out;
}

class ActionBuilder {
 public:
  explicit ActionBuilder(const BipartiteBasis& basis)
      : x1_(powers(position_operator_1(basis), 4)), x2_(powers(position_operator_2(basis), 4)) {}

  MatrixXcd operator()(const Exponents& e, double c) {
    for (int k : e) {
      if (k > 4) grow(k);
    }
    const MatrixXcd left = x1_[e[0]] * x2_[e[2]];
    const MatrixXcd right = x1_[e[1]] * x2_[e[3]];
    // vec(A ρ B) = (Bᵀ ⊗ A) vec ρ
    return c * Eigen::kroneckerProduct(right.transpose(), left).eval();
  }

 private:
  void grow(int k) {
    while (static_cast<int>(x1_.size()) <= k) {
      x1_.push_back(x1_.back() * x1_[1]);
      x2_.push_back(x2_.back() * x2_[1]);
    }
  }

  std::vector<MatrixXcd> x1_, x2_;
};

}  // namespace

MatrixXcd superpotential_action(const BipartiteBasis& basis, const Polynomial4& polynomial) {
  basis.validate();
  const Eigen::Index d = basis.dim();
  MatrixXcd out = MatrixXcd::Zero(d * d, d * d);
  ActionBuilder build(basis);
  for (const auto& [e, c] : polynomial.terms()) out += build(e, c);
  return out;
}

MatrixXcd monomial_action(const BipartiteBasis& basis, const ClassifiedMonomial& term) {
  basis.validate();
  ActionBuilder build(basis);
  return build(term.exponents, term.coefficient);
}

MatrixXcd build_bipartite_liouvillian(const BipartiteBasis& basis, double lambda, Dynamics kind) {
  basis.validate();
  const MatrixXcd h0 = bipartite_free_hamiltonian(basis);
  const MatrixXcd id = MatrixXcd::Identity(basis.dim(), basis.dim());
  MatrixXcd l = Eigen::kroneckerProduct(id, h0).eval();
  l -= Eigen::kroneckerProduct(h0.transpose(), id).eval();
  if (lambda != 0.0) {
    const Polynomial4 v =
        kind == Dynamics::QM ? bipartite_qm_polynomial(lambda) : bipartite_cl_polynomial(lambda);
    l += superpotential_action(basis, v);
  }
  return l;
}

MatrixXcd reduced_density(const MatrixXcd& rho, int n_levels, int subsystem) {
  const int n = n_levels;
  if (rho.rows() != n * n || rho.cols() != n * n) {
    raise(ErrorKind::InvalidArgument, "bipartite density has the wrong dimension");
  }
  if (subsystem != 1 && subsystem != 2) raise(ErrorKind::InvalidArgument, "subsystem must be 1 or 2");
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out(i, j) += subsystem == 1 ? rho(i * n + k, j * n + k) : rho(k * n + i, k * n + j);
      }
    }
  }
  return out;
}

EntanglementMetrics entanglement_metrics(const MatrixXcd& rho, int n_levels) {
  EntanglementMetrics m;
  const MatrixXcd r1 = reduced_density(rho, n_levels, 1);
  m.reduced_purity = (r1 * r1).trace().real();
  const MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  const VectorXd& ev = solver.eigenvalues();
  m.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  return m;
}

MatrixXcd coherent_product_state(const BipartiteBasis& basis, cplx alpha1, cplx alpha2) {
  auto coherent = [&](cplx alpha) {
    VectorXcd c(basis.n_levels);
    c(0) = 1.0;
    for (int k = 1; k < basis.n_levels; ++k) c(k) = c(k - 1) * alpha / std::sqrt(static_cast<double>(k));
    return VectorXcd(c.normalized());
  };
  const VectorXcd psi = Eigen::kroneckerProduct(coherent(alpha1), coherent(alpha2)).eval();
  return psi * psi.adjoint();
}

double top_level_population(const MatrixXcd& rho, int n_levels) {
  const MatrixXcd r1 = reduced_density(rho, n_levels, 1);
  const MatrixXcd r2 = reduced_density(rho, n_levels, 2);
  return std::max(r1(n_levels - 1, n_levels - 1).real(), r2(n_levels - 1, n_levels - 1).real());
}

std::vector<EntanglementRow> compare_cl_qm_entanglement(const BipartiteBasis& basis, double lambda,
                                                        const MatrixXcd& rho0,
                                                        const std::vector<double>& times,
                                                        double leak_limit) {
  basis.validate();
  if (rho0.rows() != basis.dim() || rho0.cols() != basis.dim()) {
    raise(ErrorKind::InvalidArgument, "initial state has the wrong dimension");
  }
  const ExactPropagator cl(build_bipartite_liouvillian(basis, lambda, Dynamics::CL), basis.hbar);
  const ExactPropagator qm(build_bipartite_liouvillian(basis, lambda, Dynamics::QM), basis.hbar);
  const double tr0 = rho0.trace().real();
  std::vector<EntanglementRow> rows;
  for (double t : times) {
    const MatrixXcd rc = t == 0.0 ? rho0 : cl.apply(rho0, t);
    const MatrixXcd rq = t == 0.0 ? rho0 : qm.apply(rho0, t);
    if (leak_limit > 0.0) {
      const double leak = std::max(top_level_population(rc, basis.n_levels),
                                   top_level_population(rq, basis.n_levels));
      if (leak > leak_limit) {
        raise(ErrorKind::TruncationLeak,
              "top oscillator level holds population " + std::to_string(leak));
      }
    }
    const EntanglementMetrics mc = entanglement_metrics(rc, basis.n_levels);
    const EntanglementMetrics mq = entanglement_metrics(rq, basis.n_levels);
    EntanglementRow row;
    row.t = t;
    row.purity_cl = mc.reduced_purity;
    row.purity_qm = mq.reduced_purity;
    row.min_eig_cl = mc.eigenvalues.front();
    row.min_eig_qm = mq.eigenvalues.front();
    row.trace_drift = std::max(std::abs(rc.trace().real() - tr0), std::abs(rq.trace().real() - tr0));
    row.hermiticity = std::max(hermiticity_deviation(rc), hermiticity_deviation(rq));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace superdyn
