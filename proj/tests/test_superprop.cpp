#include <doctest.h>

#include <cmath>
#include <random>

#include "superdyn/errors.hpp"
#include "superdyn/evolution.hpp"
#include "superdyn/superprop.hpp"

using namespace superdyn;

TEST_CASE("free propagator") {
  CHECK(std::abs(free_propagator(0.3, 0.3, 1.0)) == doctest::Approx(1.0 / std::sqrt(2 * kPi)));
  CHECK(std::abs(free_propagator(0.3, -2.0, 1.0)) == doctest::Approx(1.0 / std::sqrt(2 * kPi)));
  CHECK_THROWS_AS(free_propagator(0.0, 0.0, 0.0), Error);

  // Semigroup: ∫dz G(x,z;T1) G(z,y;T2) = G(x,y;T1+T2). The oscillatory integral is
  // evaluated along z = s e^{iπ/4}, where the integrand decays as a Gaussian.
  const double x = 0.4, y = -0.3, T1 = 0.7, T2 = 1.1;
  const cplx rot = std::exp(cplx(0, kPi / 4));
  auto g = [](cplx a, cplx b, double T) {
    return std::sqrt(1.0 / (2 * kPi * kI * T)) * std::exp(kI * (a - b) * (a - b) / (2 * T));
  };
  const auto r = integrate_adaptive([&](double s) { return g(x, s * rot, T1) * g(s * rot, y, T2) * rot; },
                                    -40.0, 40.0, 1e-10);
  CHECK(std::abs(r.value - free_propagator(x, y, T1 + T2)) < 1e-4);
}

TEST_CASE("free superpropagator") {
  const PropagatorPoint diag{0.5, 0.5, -0.2, -0.2, 1.3, 2.0, 1.0};
  const cplx g = free_superpropagator(diag);
  CHECK(g.imag() == doctest::Approx(0.0).scale(1.0));
  CHECK(g.real() == doctest::Approx(2.0 / (2 * kPi * 1.3)));

  const PropagatorPoint a{0.3, -0.4, 0.9, 0.1, 0.8};
  const PropagatorPoint b{-0.4, 0.3, 0.1, 0.9, 0.8};
  CHECK(std::abs(free_superpropagator(a) - std::conj(free_superpropagator(b))) < 1e-14);
}

TEST_CASE("free superpropagator transports a Gaussian ballistically") {
  // ρ(Q,Q;T) = Σᵢⱼ G₀(Q,Qᵢ) conj G₀(Q,qⱼ) ρ0(Qᵢ,qⱼ) ΔQ² by trapezoid on a fine grid,
  // compared with the free Trotter step on the coarse evolution grid.
  const double x0 = -0.5, p0 = 0.6, sx = 0.7, sp = 1.0, T = 0.5;
  const SuperGrid fine{-7.0, 7.0, 560};
  const SuperDensity rho0 = gaussian_super_density(fine, x0, p0, sx, sp);
  const double h = fine.spacing();
  double norm = 0.0, first = 0.0;
  const SuperGrid out{-6.0, 6.0, 120};
  for (int k = 0; k < out.n; ++k) {
    const double Q = out.coord(k);
    VectorXcd g(fine.n);
    for (int i = 0; i < fine.n; ++i) g(i) = free_propagator(Q, fine.coord(i), T);
    const double diag = (g.transpose() * rho0.values * g.conjugate()).value().real() * h * h;
    norm += diag * out.spacing();
    first += Q * diag * out.spacing();
  }
  const SuperGrid grid{-8.0, 8.0, 64};
  EvolutionConfig c;
  c.t1 = T;
  c.n_steps = 1;
  const SuperDensity ref =
      evolve_trotter(PolynomialPotential(), grid, Dynamics::QM, gaussian_super_density(grid, x0, p0, sx, sp), c);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(first / norm == doctest::Approx(expect_x(ref)).epsilon(1e-4));
  CHECK(expect_x(ref) == doctest::Approx(x0 + p0 * T).epsilon(1e-6));
}

TEST_CASE("gamma values") {
  const PropagatorPoint p1{1, 0, 1, 0, 1.0};
  const PropagatorPoint p2{1, 1, 0, 0, 1.0};
  CHECK(std::abs(gamma_qm(p1) - cplx(1, 1)) < 1e-12);
  CHECK(std::abs(gamma_qm(p2) - cplx(0, 0.6)) < 1e-12);
  CHECK(std::abs(gamma_cl(p1)) < 1e-12);
  CHECK(std::abs(gamma_cl(p2) - cplx(0, 0.6)) < 1e-12);

  const PropagatorPoint d{0.7, 0.7, -0.4, -0.4, 1.3};
  CHECK(std::abs(gamma_qm(d).real()) < 1e-12);
  CHECK(std::abs(gamma_cl(d).real()) < 1e-12);
}

TEST_CASE("first-order superpropagator") {
  const PropagatorPoint p1{1, 0, 1, 0, 1.0};
  const cplx g0 = free_superpropagator(p1);
  CHECK(first_order_superpropagator(p1, 0.0, Dynamics::QM) == g0);
  const cplx diff = first_order_superpropagator(p1, 0.3, Dynamics::CL) -
                    first_order_superpropagator(p1, 0.3, Dynamics::QM);
  const cplx expected = g0 * (-kI) * 0.3 * (0.5 * gamma_qm(p1) - 0.5 * gamma_cl(p1)) * -1.0;
  // CL − QM = 𝒢₀(-i λ)[(½Γ_QM + ½Γ_CL) − Γ_QM] = -𝒢₀(-iλ)(½Γ_QM − ½Γ_CL)
  CHECK(std::abs(diff - expected) < 1e-14);
}

TEST_CASE("numeric Dyson integral") {
  const PropagatorPoint p{0.3, -0.2, 0.5, 0.1, 0.9};
  CHECK(dyson_first_order_numeric(p, 0.0, Dynamics::CL) == cplx(0.0));
  const cplx one = dyson_first_order_numeric(p, 0.25, Dynamics::QM);
  const cplx two = dyson_first_order_numeric(p, 0.5, Dynamics::QM);
  CHECK(std::abs(two - 2.0 * one) < 1e-12 * std::abs(two));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const PropagatorPoint pt{u(rng), u(rng), u(rng), u(rng), 0.5 + 0.5 * (u(rng) + 1.0)};
    const cplx g0 = free_superpropagator(pt);
    for (Dynamics kind : {Dynamics::QM, Dynamics::CL}) {
      const cplx closed = first_order_superpropagator(pt, 0.1, kind) - g0;
      const cplx numeric = dyson_first_order_numeric(pt, 0.1, kind);
      CHECK(std::abs(closed - numeric) < 1e-3 * std::abs(numeric));
    }
  }
}

TEST_CASE("grid Dyson series") {
  const SuperGrid grid{-6.0, 6.0, 32};
  const auto v = PolynomialPotential::monomial(4, 0.05);
  const SuperDensity rho0 = gaussian_super_density(grid, 0.5, 0.2, 0.6, 0.7);
  const double T = 0.4;
  EvolutionConfig c;
  c.t1 = T;
  c.n_steps = 1;
  const SuperDensity free = evolve_trotter(PolynomialPotential(), grid, Dynamics::CL, rho0, c);
  const DysonSeries zeroth(v, grid, Dynamics::CL, T, 0);
  CHECK((zeroth.apply(rho0.values) - free.values).cwiseAbs().maxCoeff() < 1e-12);

  const SuperDensity exact = evolve_exact(GridLiouvillian(v, grid, Dynamics::CL), rho0, T);
  double previous = std::numeric_limits<double>::infinity();
  for (int order = 0; order <= 2; ++order) {
    const DysonSeries s(v, grid, Dynamics::CL, T, order, 400);
    const double err = (s.apply(rho0.values) - exact.values).cwiseAbs().maxCoeff();
    CHECK(err < previous);
    previous = err;
  }

  // The materialized kernel reproduces the series application.
  const SuperGrid small{-4.0, 4.0, 12};
  const SuperDensity r = gaussian_super_density(small, 0.0, 0.0, 0.8, 0.7);
  const MatrixXcd k = dyson_iterate(small, v, Dynamics::QM, 1, T, 100);
  const DysonSeries s(v, small, Dynamics::QM, T, 1, 100);
  CHECK((unvectorize(k * vectorize(r.values), 12) - s.apply(r.values)).cwiseAbs().maxCoeff() < 1e-12);
}
