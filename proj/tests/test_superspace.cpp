#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "superdyn/errors.hpp"
#include "superdyn/superspace.hpp"

using namespace superdyn;

namespace {

PhaseGrid test_grid() { return PhaseGrid::reciprocal(-8.0, 8.0, 64, 128); }

}  // namespace

TEST_CASE("reciprocal grid satisfies the spacing relation") {
  const PhaseGrid g = PhaseGrid::reciprocal(-4.0, 4.0, 32, 64, 0.5, 0.7);
  CHECK(g.dx() * g.dp() == doctest::Approx(2 * kPi * 0.7 / 64));
  CHECK(0.5 * (g.p_min + g.p_max) == doctest::Approx(0.5));
}

TEST_CASE("Gaussian phase density maps to its closed-form image") {
  const PhaseGrid g = test_grid();
  const PhaseDensity w = gaussian_phase_density(g, 1.0, 0.8, 0.4, 0.5);
  const SuperDensity rho = phase_to_super(w);
  const SuperDensity ref = gaussian_super_density(super_grid_for(g), 1.0, 0.8, 0.4, 0.5);
  // Band-limit error of the half-step x shift: the x spectrum of the Gaussian at the
  // Nyquist wavenumber is about e^{-12.6} ≈ 3e-6 of its peak.
  CHECK((rho.values - ref.values).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(hermiticity_deviation(rho) < 1e-10);

  // Narrow Gaussian as a surrogate of a phase-space point: e^{i p0 (Q - q)} times a profile in (Q+q)/2.
  const PhaseDensity narrow = gaussian_phase_density(g, 0.5, -1.0, 0.25, 0.25);
  const SuperDensity r2 = phase_to_super(narrow);
  const SuperGrid sg = r2.grid;
  const int a = 36, b = 34;  // off-diagonal near the peak
  const double Q = sg.coord(a), q = sg.coord(b);
  const cplx expected = std::exp(cplx(0, -1.0 * (Q - q))) *
                        std::exp(-std::pow(0.5 * (Q + q) - 0.5, 2) / (2 * 0.0625)) /
                        std::sqrt(2 * kPi * 0.0625) * std::exp(-0.0625 * (Q - q) * (Q - q) / 2);
  CHECK(std::abs(r2.values(a, b) - expected) < 0.01 * std::abs(expected));
}

TEST_CASE("round trip phase → super → phase") {
  const PhaseGrid g = test_grid();
  const PhaseDensity w = gaussian_phase_density(g, -0.7, 0.3, 0.6, 0.9);
  const PhaseDensity back = super_to_phase(phase_to_super(w), g);
  CHECK((back.values - w.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("uniform phase density concentrates on the diagonal") {
  const PhaseGrid g = PhaseGrid::reciprocal(-2.0, 2.0, 16, 32);
  PhaseDensity w{g, MatrixXd::Ones(16, 32)};
  const SuperDensity rho = phase_to_super(w);
  double off = 0.0, diag = 0.0;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) (a == b ? diag : off) = std::max(a == b ? diag : off, std::abs(rho.values(a, b)));
  CHECK(diag > 0.0);
  CHECK(off < 1e-12 * diag);
}

TEST_CASE("Gaussian pure state maps to a real normalizable Wigner function") {
  const PhaseGrid g = test_grid();
  const SuperGrid sg = super_grid_for(g);
  SuperDensity rho{sg, MatrixXcd(sg.n, sg.n)};
  for (int a = 0; a < sg.n; ++a)
    for (int b = 0; b < sg.n; ++b) {
      const double Q = sg.coord(a), q = sg.coord(b);
      rho.values(a, b) = std::exp(-(Q * Q + q * q) / 2) / std::sqrt(kPi);
    }
  const PhaseDensity w = super_to_phase(rho, g);
  CHECK(phase_moments(w).norm == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(w.values.minCoeff() > -1e-10);
}

TEST_CASE("non-Hermitian input is rejected") {
  const PhaseGrid g = PhaseGrid::reciprocal(-2.0, 2.0, 8, 16);
  SuperDensity rho{super_grid_for(g), MatrixXcd::Zero(8, 8)};
  rho.values(1, 2) = 1.0;
  try {
    super_to_phase(rho, g);
    FAIL("expected HermiticityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HermiticityViolation);
  }
}

TEST_CASE("trace and moments") {
  const SuperGrid sg{-10.0, 10.0, 128};
  const SuperDensity rho = gaussian_super_density(sg, 1.5, -0.5, 0.7, 0.8);
  CHECK(trace(rho) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(expect_x(rho) == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(expect_p(rho) == doctest::Approx(-0.5).epsilon(1e-4));
  CHECK(expect_xp_weyl(rho) == doctest::Approx(1.5 * -0.5).epsilon(1e-4));
  CHECK(expect_x2(rho) == doctest::Approx(1.5 * 1.5 + 0.49).epsilon(1e-6));

  SuperDensity zero{sg, MatrixXcd::Zero(sg.n, sg.n)};
  CHECK(trace(zero) == 0.0);
  SuperDensity scaled{sg, 2.5 * rho.values};
  CHECK(trace(scaled) == doctest::Approx(2.5 * trace(rho)));

  const SuperDensity sym = gaussian_super_density(SuperGrid{-10.0, 10.0, 128}, 0.0, 0.0, 0.7, 0.8);
  // The grid is not symmetric about 0 (left-closed), so allow the discretization offset.
  CHECK(std::abs(expect_x(sym)) < 1e-10);
  CHECK(std::abs(expect_p(sym)) < 1e-10);
}

TEST_CASE("spectrum report") {
  const SuperGrid sg{-8.0, 8.0, 64};
  const SuperDensity pure = pure_state_density(sg, [](double x) {
    return std::exp(-x * x / 2) / std::pow(kPi, 0.25);
  });
  const auto ev = spectrum_report(pure);
  CHECK(ev.front() == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 1; i < ev.size(); ++i) CHECK(std::abs(ev[i]) < 1e-10);

  SuperDensity zero{sg, MatrixXcd::Zero(sg.n, sg.n)};
  for (double e : spectrum_report(zero)) CHECK(e == 0.0);

  // Two sharp classical peaks: the implied operator is not positive.
  const PhaseGrid g = PhaseGrid::reciprocal(-8.0, 8.0, 64, 128);
  PhaseDensity w = gaussian_phase_density(g, -2.0, 0.0, 0.1, 0.1);
  w.values += gaussian_phase_density(g, 2.0, 0.0, 0.1, 0.1).values;
  w.values *= 0.5;
  const auto ev2 = spectrum_report(phase_to_super(w));
  CHECK(ev2.back() < -1e-6);
}

TEST_CASE("CSV round trip") {
  const SuperGrid sg{-3.0, 3.0, 12};
  const SuperDensity rho = gaussian_super_density(sg, 0.2, 0.4, 0.8, 0.9);
  const auto path = std::filesystem::temp_directory_path() / "superdyn_test_rho.csv";
  write_super_density(path, rho);
  const SuperDensity back = read_super_density(path);
  CHECK(back.grid.n == sg.n);
  CHECK(back.grid.min == doctest::Approx(sg.min));
  CHECK((back.values - rho.values).cwiseAbs().maxCoeff() < 1e-15);
}
