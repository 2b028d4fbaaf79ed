#include <doctest.h>

#include <algorithm>
#include <random>

#include "superdyn/errors.hpp"
#include "superdyn/liouvillian.hpp"

using namespace superdyn;

namespace {

MatrixXcd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  const MatrixXcd m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

std::vector<double> sorted_real(const std::vector<cplx>& ev) {
  std::vector<double> out;
  for (const auto& e : ev) out.push_back(e.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("harmonic potential gives identical CL and QM operators") {
  const SuperGrid grid{-4.0, 4.0, 12};
  const PolynomialPotential v({0.2, -0.1, 0.5});
  const GridLiouvillian cl(v, grid, Dynamics::CL), qm(v, grid, Dynamics::QM);
  CHECK((cl.dense() - qm.dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("free plane wave along the anti-diagonal is stationary") {
  const SuperGrid grid{-4.0, 4.0, 16};
  const GridLiouvillian l(PolynomialPotential(), grid, Dynamics::QM);
  const double k = 2 * kPi * 3 / (grid.max - grid.min);
  MatrixXcd rho(16, 16);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) rho(a, b) = std::exp(cplx(0, k * (grid.coord(a) - grid.coord(b))));
  CHECK(l.apply(rho).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("classical diagonal equals the classical superpotential") {
  const SuperGrid grid{-3.0, 3.0, 20};
  const auto v = PolynomialPotential::monomial(4, 0.3);
  const GridLiouvillian l(v, grid, Dynamics::CL);
  const MatrixXd d = l.super_diagonal();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> idx(0, grid.n - 1);
  for (int i = 0; i < 100; ++i) {
    const int a = idx(rng), b = idx(rng);
    CHECK(d(a, b) == doctest::Approx(super_potential(v, Dynamics::CL, grid.coord(a), grid.coord(b)))
                         .epsilon(1e-12)
                         .scale(1.0));
  }
  CHECK((l.e_diagonal() + l.e_diagonal().transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grid Liouvillian: matrix-free and dense agree; Hermitian action") {
  const SuperGrid grid{-3.0, 3.0, 10};
  const GridLiouvillian l(PolynomialPotential::monomial(4, 0.2), grid, Dynamics::CL);
  std::mt19937_64 rng(4);
  MatrixXcd rho = random_hermitian(10, rng);
  const MatrixXcd a = l.apply(rho);
  const MatrixXcd b = unvectorize(l.dense() * vectorize(rho), 10);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  // ℒρ is anti-Hermitian-preserving: (ℒρ)† = -ℒρ for Hermitian ρ.
  CHECK((a + a.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("basis Liouvillian examples") {
  MatrixXcd h = MatrixXcd::Zero(2, 2);
  h(0, 0) = 0.3;
  h(1, 1) = 1.7;
  const auto ev = sorted_real(spectrum(BasisLiouvillian(h)));
  CHECK(ev[0] == doctest::Approx(-1.4));
  CHECK(ev[1] == doctest::Approx(0.0));
  CHECK(ev[2] == doctest::Approx(0.0));
  CHECK(ev[3] == doctest::Approx(1.4));

  CHECK(BasisLiouvillian(MatrixXcd::Zero(3, 3)).dense().cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(9);
  const MatrixXcd hr = random_hermitian(5, rng);
  const MatrixXcd rho = random_matrix(5, rng);
  const BasisLiouvillian l(hr);
  CHECK((l.apply(rho) - (hr * rho - rho * hr)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((unvectorize(l.dense() * vectorize(rho), 5) - (hr * rho - rho * hr)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("spectrum of a three-level commutator") {
  MatrixXcd h = MatrixXcd::Zero(3, 3);
  h(1, 1) = 1.0;
  h(2, 2) = 3.0;
  const auto ev = sorted_real(spectrum(BasisLiouvillian(h)));
  const std::vector<double> expected{-3, -2, -1, 0, 0, 0, 1, 2, 3};
  for (std::size_t i = 0; i < 9; ++i) CHECK(ev[i] == doctest::Approx(expected[i]).scale(1.0));
  for (const auto& e : spectrum(BasisLiouvillian(MatrixXcd::Zero(3, 3)))) CHECK(std::abs(e) == 0.0);
}

TEST_CASE("spectral negation symmetry") {
  const SuperGrid grid{-3.0, 3.0, 16};
  const GridLiouvillian cl(PolynomialPotential::monomial(4, 0.1), grid, Dynamics::CL);
  CHECK(spectral_negation_mismatch(spectrum(cl)) < 1e-8);
  std::mt19937_64 rng(6);
  CHECK(spectral_negation_mismatch(spectrum(BasisLiouvillian(random_hermitian(6, rng)))) < 1e-8);
}

TEST_CASE("error paths") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(BasisLiouvillian(random_matrix(3, rng)), Error);
  const SuperGrid big{-1.0, 1.0, 80};
  const GridLiouvillian l(PolynomialPotential(), big, Dynamics::QM);
  try {
    (void)l.dense();
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionTooLarge);
  }
}
