#include <doctest.h>

#include <cmath>
#include <random>

#include "superdyn/errors.hpp"
#include "superdyn/evolution.hpp"

using namespace superdyn;

namespace {

MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return 0.5 * (m + m.adjoint());
}

MatrixXcd random_density(int n, std::mt19937_64& rng) {
  const MatrixXcd a = random_hermitian(n, rng);
  MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("trotter-strang") == Method::TrotterStrang);
  CHECK(parse_method("lie") == Method::TrotterLie);
  CHECK(parse_method("exact") == Method::MatrixExp);
  CHECK(parse_method(to_string(Method::RK4)) == Method::RK4);
  CHECK_THROWS_AS(parse_method("euler"), Error);
  EvolutionConfig bad;
  bad.t1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("exact evolution: identity, phase and semigroup") {
  std::mt19937_64 rng(1);
  const MatrixXcd rho0 = random_density(4, rng);
  const BasisLiouvillian l(random_hermitian(4, rng));
  CHECK((evolve_exact(l, rho0, 0.0) - rho0).cwiseAbs().maxCoeff() < 1e-14);
  const MatrixXcd a = evolve_exact(l, evolve_exact(l, rho0, 0.4), 0.9);
  CHECK((a - evolve_exact(l, rho0, 1.3)).cwiseAbs().maxCoeff() < 1e-10);

  const double we = 1.7, t = 2.3;
  MatrixXcd h = MatrixXcd::Zero(2, 2);
  h(1, 1) = we;
  MatrixXcd r = MatrixXcd::Constant(2, 2, 0.5);
  const MatrixXcd rt = evolve_exact(BasisLiouvillian(h), r, t);
  // ρ_eg with e = 1, g = 0
  CHECK(std::abs(rt(1, 0) - std::exp(cplx(0, -we * t)) * 0.5) < 1e-12);
}

TEST_CASE("ordered evolution") {
  std::mt19937_64 rng(2);
  const MatrixXcd l0 = BasisLiouvillian(random_hermitian(3, rng)).dense();
  const VectorXcd v0 = vectorize(random_density(3, rng));
  const ExactPropagator exact(l0);
  const VectorXcd ref = exact.apply(v0, 1.2);
  const VectorXcd got = evolve_ordered([&](double) { return l0; }, v0, 0.0, 1.2, 256);
  CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-6);

  auto f = [](double t) { return 1.0 + 0.5 * std::sin(3.0 * t); };
  const double integral = 1.2 + 0.5 * (1.0 - std::cos(3.6)) / 3.0;
  const VectorXcd driven = evolve_ordered([&](double t) { MatrixXcd m = f(t) * l0; return m; }, v0, 0.0, 1.2, 2000);
  CHECK((driven - exact.apply(v0, integral)).cwiseAbs().maxCoeff() < 1e-6);

  // Non-commuting drive: second-order convergence.
  const MatrixXcd l1 = BasisLiouvillian(random_hermitian(3, rng)).dense();
  auto gen = [&](double t) { MatrixXcd m = l0 + std::cos(2.0 * t) * l1; return m; };
  const VectorXcd fine = evolve_ordered(gen, v0, 0.0, 1.0, 4096);
  const double e1 = (evolve_ordered(gen, v0, 0.0, 1.0, 32) - fine).norm();
  const double e2 = (evolve_ordered(gen, v0, 0.0, 1.0, 64) - fine).norm();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("interaction picture") {
  std::mt19937_64 rng(3);
  const MatrixXcd h0 = random_hermitian(3, rng);
  const MatrixXcd l0 = BasisLiouvillian(h0).dense();
  const VectorXcd v0 = vectorize(random_density(3, rng));
  const MatrixXcd zero = MatrixXcd::Zero(9, 9);
  CHECK((evolve_interaction_picture(l0, zero, v0, 0.0, 1.0, 10) - ExactPropagator(l0).apply(v0, 1.0))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  // Perturbation commuting with ℒ0: a function of H0.
  const MatrixXcd lp = BasisLiouvillian(0.3 * h0 * h0).dense();
  const VectorXcd full = ExactPropagator(l0 + lp).apply(v0, 1.0);
  CHECK((evolve_interaction_picture(l0, lp, v0, 0.0, 1.0, 4) - full).cwiseAbs().maxCoeff() < 1e-10);

  // First-order truncation error scales as the square of the coupling.
  const MatrixXcd l1 = BasisLiouvillian(random_hermitian(3, rng)).dense();
  auto err = [&](double g) {
    const VectorXcd ref = ExactPropagator(l0 + g * l1).apply(v0, 1.0);
    return (interaction_picture_first_order(l0, g * l1, v0, 1.0) - ref).norm();
  };
  const double slope = std::log10(err(1e-2) / err(1e-3));
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("free Trotter step is exact and ballistic") {
  const SuperGrid grid{-12.0, 12.0, 96};
  const SuperDensity rho0 = gaussian_super_density(grid, -1.0, 0.8, 0.5, 0.7);
  EvolutionConfig c;
  c.t1 = 2.0;
  c.n_steps = 1;
  c.mass = 2.0;
  const SuperDensity one = evolve_trotter(PolynomialPotential(), grid, Dynamics::CL, rho0, c);
  c.n_steps = 50;
  const SuperDensity many = evolve_trotter(PolynomialPotential(), grid, Dynamics::CL, rho0, c);
  CHECK((one.values - many.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(expect_x(one) == doctest::Approx(-1.0 + 0.8 * 2.0 / 2.0).epsilon(1e-6));
  CHECK(expect_p(one) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("harmonic CL and QM Trotter runs coincide") {
  const SuperGrid grid{-8.0, 8.0, 64};
  const SuperDensity rho0 = gaussian_super_density(grid, 1.0, 0.0, 0.5, 1.0);
  EvolutionConfig c;
  c.t1 = 3.0;
  c.n_steps = 60;
  const PolynomialPotential v({0.0, 0.0, 0.5});
  const SuperDensity a = evolve_trotter(v, grid, Dynamics::CL, rho0, c);
  const SuperDensity b = evolve_trotter(v, grid, Dynamics::QM, rho0, c);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Strang splitting converges at second order") {
  const SuperGrid grid{-5.0, 5.0, 24};
  const auto v = PolynomialPotential::monomial(4, 0.1);
  const SuperDensity rho0 = gaussian_super_density(grid, 0.5, 0.0, 0.6, 0.8);
  const GridLiouvillian l(v, grid, Dynamics::CL);
  const SuperDensity ref = evolve_exact(l, rho0, 0.5);
  auto err = [&](int steps) {
    EvolutionConfig c;
    c.t1 = 0.5;
    c.n_steps = steps;
    return (evolve_trotter(v, grid, Dynamics::CL, rho0, c).values - ref.values).cwiseAbs().maxCoeff();
  };
  CHECK(err(10) / err(20) == doctest::Approx(4.0).epsilon(0.2));

  // RK4 as an independent reference.
  EvolutionConfig c;
  c.t1 = 0.5;
  c.n_steps = 400;
  c.method = Method::RK4;
  CHECK((evolve_grid(v, grid, Dynamics::CL, rho0, c).values - ref.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("characteristics") {
  // Harmonic: one period returns the ensemble.
  const PolynomialPotential harmonic({0.0, 0.0, 0.5});
  const auto ens = gaussian_ensemble_quadrature(1.0, 0.5, 0.3, 0.4, 8);
  const auto m0 = ensemble_moments(ens);
  const auto back = evolve_characteristics(harmonic, ens, 2 * kPi, 2 * kPi / 2000);
  const auto m1 = ensemble_moments(back.ensemble);
  CHECK(m1.x == doctest::Approx(m0.x).epsilon(1e-6));
  CHECK(m1.p == doctest::Approx(m0.p).epsilon(1e-6));
  CHECK(m1.x2 == doctest::Approx(m0.x2).epsilon(1e-6));

  // Free: ballistic exactly.
  const auto rnd = gaussian_ensemble_random(0.2, -0.6, 0.5, 0.5, 1000, 42);
  const auto f = evolve_characteristics(PolynomialPotential(), rnd, 1.5, 0.01, 2.0);
  const auto r0 = ensemble_moments(rnd), r1 = ensemble_moments(f.ensemble);
  CHECK(r1.x == doctest::Approx(r0.x + r0.p * 1.5 / 2.0).epsilon(1e-12));
  CHECK(r1.p == doctest::Approx(r0.p).epsilon(1e-12));

  // Seeded sampling is reproducible.
  const auto again = gaussian_ensemble_random(0.2, -0.6, 0.5, 0.5, 1000, 42);
  CHECK(again.samples[17].x == rnd.samples[17].x);
}

TEST_CASE("characteristics agree with the grid CL evolution for the quartic") {
  const auto v = PolynomialPotential::monomial(4, 0.1);
  const SuperGrid grid{-8.0, 8.0, 96};
  const SuperDensity rho0 = gaussian_super_density(grid, 1.0, 0.0, 0.5, 1.0);
  EvolutionConfig c;
  c.t1 = 0.5;
  c.n_steps = 200;
  const SuperDensity rho = evolve_trotter(v, grid, Dynamics::CL, rho0, c);
  const auto ens = evolve_characteristics(v, gaussian_ensemble_quadrature(1.0, 0.0, 0.5, 1.0, 40), 0.5);
  const auto m = ensemble_moments(ens.ensemble);
  CHECK(std::abs(expect_x(rho) - m.x) < 1e-3);
  CHECK(std::abs(expect_p(rho) - m.p) < 1e-3);
  CHECK(std::abs(expect_x2(rho) - m.x2) < 1e-3);
}

TEST_CASE("energy drift guard") {
  const auto v = PolynomialPotential::monomial(4, 1.0);
  const auto ens = gaussian_ensemble_quadrature(2.0, 0.0, 0.5, 0.5, 4);
  try {
    evolve_characteristics(v, ens, 1.0, 0.2, 1.0, 1e-12);
    FAIL("expected EnergyDriftExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EnergyDriftExceeded);
  }
}
