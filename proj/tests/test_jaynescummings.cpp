#include <doctest.h>

#include <cmath>

#include "superdyn/errors.hpp"
#include "superdyn/jaynescummings.hpp"

using namespace superdyn;

TEST_CASE("JC Hamiltonian") {
  JCParams p;
  p.omega_e = 1.3;
  p.omega = 0.9;
  p.n_max = 4;
  MatrixXcd h = build_jc_hamiltonian(p);
  CHECK((h - MatrixXcd(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h(jc_index(kExcited, 2, 4), jc_index(kExcited, 2, 4)).real() == doctest::Approx(1.3 + 0.9 * 2.5));

  p.d_eg = 0.05;
  h = build_jc_hamiltonian(p);
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(h(jc_index(kExcited, n, 4), jc_index(kGround, n + 1, 4)) -
                   kI * 0.05 * std::sqrt(n + 1.0)) < 1e-15);
  }
  CHECK(hermiticity_deviation(h) == 0.0);
}

TEST_CASE("multilevel Hamiltonian") {
  JCParams p;
  p.omega_e = 1.1;
  p.omega = 1.0;
  p.d_eg = 0.07;
  p.n_max = 3;
  MatrixXd d(2, 2);
  d << 0.0, 0.07, 0.07, 0.0;
  const MatrixXcd rwa = build_multilevel_hamiltonian({0.0, 1.1}, d, 1.0, 3, true);
  CHECK((rwa - build_jc_hamiltonian(p)).cwiseAbs().maxCoeff() == 0.0);

  const MatrixXcd diag = build_multilevel_hamiltonian({0.0, 1.0, 2.5}, MatrixXd::Zero(3, 3), 1.0, 3);
  CHECK((diag - MatrixXcd(diag.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  MatrixXd d3(3, 3);
  d3 << 0, 0.1, 0.2, 0.1, 0, 0.3, 0.2, 0.3, 0;
  const MatrixXcd h3 = build_multilevel_hamiltonian({0.0, 1.0, 2.5}, d3, 1.0, 3);
  for (const cplx& e : dense_spectrum(h3)) CHECK(std::abs(e.imag()) < 1e-12);

  d3(0, 1) = 0.5;
  CHECK_THROWS_AS(build_multilevel_hamiltonian({0.0, 1.0, 2.5}, d3, 1.0, 3), Error);
}

TEST_CASE("superoperator structure") {
  JCParams p;
  p.eps_egeg = {0.3, 0.2};
  p.eps_eegg = {0.1, -0.4};
  const auto e = jc_atom_superoperator(p);
  CHECK(e[kGround][kExcited][kGround][kExcited] == -std::conj(p.eps_egeg));
  CHECK(e[kGround][kGround][kExcited][kExcited] == -std::conj(p.eps_eegg));
}

TEST_CASE("vacuum Rabi oscillation") {
  JCParams p;
  p.d_eg = 0.05;
  const MatrixXcd rho0 = jc_product_state(Eigen::Matrix2cd(Eigen::Vector2cd(0, 1).asDiagonal()),
                                          fock_density(0, p.n_max));
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(kPi / p.d_eg * k / 100);
  const auto states = jc_evolve_exact_series(p, rho0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double c = std::cos(p.d_eg * times[k]);
    CHECK(std::abs(excited_population(states[k], p.n_max) - c * c) < 1e-6);
    CHECK(std::abs(states[k].trace().real() - 1.0) < 1e-8);
  }
}

TEST_CASE("imaginary ℰ_eg,eg acts as a coherence rate") {
  // i ∂ₜ ρ_eg = ω_e ρ_eg + iκ ρ_eg  ⇒  |ρ_eg(t)| = e^{κt} |ρ_eg(0)|.
  JCParams p;
  p.omega_e = 1.2;
  p.eps_egeg = {0.0, 0.05};
  Eigen::Matrix2cd atom;
  atom << 0.5, 0.5, 0.5, 0.5;
  const MatrixXcd rho0 = jc_product_state(atom, fock_density(0, p.n_max));
  for (double t : {1.0, 4.0, 10.0}) {
    const MatrixXcd r = jc_evolve_exact(p, rho0, t);
    CHECK(std::abs(coherence_eg00(r, p.n_max)) == doctest::Approx(0.5 * std::exp(0.05 * t)).epsilon(1e-10));
    CHECK(std::abs(r.trace().real() - 1.0) < 1e-8);
  }
}

TEST_CASE("first-order evolution") {
  JCParams p;
  p.omega_e = 1.1;
  p.omega = 0.9;
  p.n_max = 6;
  Eigen::Matrix2cd atom;
  atom << 0.4, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.6;
  const MatrixXcd rho0 = jc_product_state(atom, coherent_density(0.5, p.n_max));
  CHECK((jc_evolve_first_order(p, rho0, 0.0) - rho0).cwiseAbs().maxCoeff() < 1e-15);

  // Uncoupled: pure phases.
  const double t = 2.0;
  const MatrixXcd free = jc_evolve_first_order(p, rho0, t);
  for (int n = 0; n <= p.n_max; ++n)
    for (int np = 0; np <= p.n_max; ++np) {
      const cplx expected = std::exp(-kI * t * (p.omega_e + p.omega * (n - np))) *
                            rho0(jc_index(kExcited, n, p.n_max), jc_index(kGround, np, p.n_max));
      CHECK(std::abs(free(jc_index(kExcited, n, p.n_max), jc_index(kGround, np, p.n_max)) - expected) <
            1e-14);
    }

  // Deviation from exact evolution is second order in t.
  p.d_eg = 0.01;
  p.eps_egeg = {0.004, 0.003};
  p.eps_eegg = {0.002, -0.001};
  auto dev = [&](double tt) {
    return (jc_evolve_first_order(p, rho0, tt) - jc_evolve_exact(p, rho0, tt, false)).cwiseAbs().maxCoeff();
  };
  CHECK(dev(1.0) / dev(0.5) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("factorization and truncation guards") {
  JCParams p;
  MatrixXcd entangled = MatrixXcd::Zero(p.dim(), p.dim());
  const int a = jc_index(kExcited, 0, p.n_max), b = jc_index(kGround, 1, p.n_max);
  entangled(a, a) = entangled(b, b) = entangled(a, b) = entangled(b, a) = 0.5;
  try {
    jc_evolve_first_order(p, entangled, 0.1);
    FAIL("expected NotFactorized");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFactorized);
  }
  const MatrixXcd hot = jc_product_state(Eigen::Matrix2cd::Identity() * 0.5, coherent_density(2.0, p.n_max));
  try {
    jc_evolve_exact(p, hot, 1.0);
    FAIL("expected TruncationLeak");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationLeak);
  }
}
