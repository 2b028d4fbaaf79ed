#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "superdyn/entangle.hpp"
#include "superdyn/errors.hpp"

using namespace superdyn;

TEST_CASE("λ = 0 makes CL and QM generators equal") {
  BipartiteBasis b;
  CHECK((build_bipartite_liouvillian(b, 0.0, Dynamics::CL) - build_bipartite_liouvillian(b, 0.0, Dynamics::QM))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("QM generator is a commutator") {
  BipartiteBasis b;
  b.n_levels = 3;
  const double lambda = 0.2;
  const MatrixXcd x = position_operator_1(b) - position_operator_2(b);
  const MatrixXcd x2 = x * x;
  const MatrixXcd h = bipartite_free_hamiltonian(b) + lambda * x2 * x2;
  MatrixXcd rho = coherent_product_state(b, 0.3, cplx(0.1, 0.2));
  rho(0, 1) += 0.1;
  const MatrixXcd got = unvectorize(build_bipartite_liouvillian(b, lambda, Dynamics::QM) * vectorize(rho), b.dim());
  CHECK((got - (h * rho - rho * h)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("CL − QM contains only mixed and cross monomials") {
  BipartiteBasis b;
  const double lambda = 0.5;
  const MatrixXcd diff = build_bipartite_liouvillian(b, lambda, Dynamics::CL) -
                         build_bipartite_liouvillian(b, lambda, Dynamics::QM);
  MatrixXcd nonpure = MatrixXcd::Zero(diff.rows(), diff.cols());
  MatrixXcd pure = nonpure;
  for (const auto& t : classify_bipartite_terms(lambda)) {
    const bool is_pure = t.cls == MonomialClass::PureBra || t.cls == MonomialClass::PureKet;
    (is_pure ? pure : nonpure) += monomial_action(b, t);
  }
  const MatrixXcd qm = superpotential_action(b, bipartite_qm_polynomial(lambda));
  // The pure part of the classical polynomial is half the quantum one; the remainder is
  // exactly the mixed and cross monomials.
  CHECK((pure - 0.5 * qm).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((diff - (nonpure - 0.5 * qm)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reduced density") {
  BipartiteBasis b;
  b.n_levels = 3;
  MatrixXcd r1 = MatrixXcd::Zero(3, 3), r2 = MatrixXcd::Zero(3, 3);
  r1 << 0.5, 0.1, 0, 0.1, 0.3, 0, 0, 0, 0.2;
  r2 << 0.6, 0, cplx(0, 0.1), 0, 0.3, 0, cplx(0, -0.1), 0, 0.1;
  const MatrixXcd prod = Eigen::kroneckerProduct(r1, r2).eval();
  CHECK((reduced_density(prod, 3, 1) - r1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((reduced_density(prod, 3, 2) - r2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(reduced_density(prod, 3, 1).trace() - prod.trace()) < 1e-12);

  // Maximally entangled pair.
  VectorXcd psi = VectorXcd::Zero(9);
  for (int k = 0; k < 3; ++k) psi(k * 3 + k) = 1.0 / std::sqrt(3.0);
  const MatrixXcd bell = psi * psi.adjoint();
  CHECK((reduced_density(bell, 3, 1) - MatrixXcd::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(entanglement_metrics(bell, 3).reduced_purity == doctest::Approx(1.0 / 3.0));
  CHECK(entanglement_metrics(coherent_product_state(b, 0.2, 0.3), 3).reduced_purity == doctest::Approx(1.0));
}

TEST_CASE("entanglement generation") {
  BipartiteBasis b;
  const MatrixXcd rho0 = coherent_product_state(b, 0.0, 0.0);
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);

  const auto free = compare_cl_qm_entanglement(b, 0.0, rho0, times, 0.0);
  for (const auto& r : free) {
    CHECK(r.purity_cl == doctest::Approx(1.0));
    CHECK(r.purity_qm == doctest::Approx(1.0));
    CHECK(r.purity_cl == doctest::Approx(r.purity_qm));
  }

  const double lambda = 0.05;
  const auto rows = compare_cl_qm_entanglement(b, lambda, rho0, times, 0.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].purity_qm < 1.0);
    CHECK(rows[k].purity_qm < rows[k - 1].purity_qm);
    CHECK(rows[k].trace_drift < 1e-8);
    CHECK(rows[k].hermiticity < 1e-8);
    CHECK(rows[k].min_eig_qm > -1e-8);
  }
  // 1 - purity ≈ c (λt)² at small λt: the coefficient is stable under t-halving.
  const auto early = compare_cl_qm_entanglement(b, lambda, rho0, {0.01, 0.02}, 0.0);
  const double c1 = (1.0 - early[0].purity_qm) / std::pow(lambda * 0.01, 2);
  const double c2 = (1.0 - early[1].purity_qm) / std::pow(lambda * 0.02, 2);
  CHECK(c1 > 0.0);
  CHECK(c2 == doctest::Approx(c1).epsilon(0.05));
}

TEST_CASE("bipartite guards") {
  BipartiteBasis b;
  b.n_levels = 9;
  CHECK_THROWS_AS(b.validate(), Error);
  BipartiteBasis small;
  const MatrixXcd rho0 = coherent_product_state(small, 1.5, 0.0);
  try {
    compare_cl_qm_entanglement(small, 0.1, rho0, {0.0, 1.0}, 1e-6);
    FAIL("expected TruncationLeak");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationLeak);
  }
}
