#include "superdyn/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "superdyn/errors.hpp"

namespace superdyn {

std::string to_string(Method method) {
  switch (method) {
    case Method::MatrixExp: return "matrix-exp";
    case Method::TrotterLie: return "trotter-lie";
    case Method::TrotterStrang: return "trotter-strang";
    case Method::RK4: return "rk4";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "matrix-exp" || text == "exact") return Method::MatrixExp;
  if (text == "trotter-lie" || text == "lie") return Method::TrotterLie;
  if (text == "trotter-strang" || text == "strang") return Method::TrotterStrang;
  if (text == "rk4") return Method::RK4;
  raise(ErrorKind::InvalidArgument, "unknown evolution method '" + text + "'");
}

void EvolutionConfig::validate() const {
  if (!(t1 > t0)) raise(ErrorKind::InvalidArgument, "evolution requires t1 > t0");
  if (n_steps < 1) raise(ErrorKind::InvalidArgument, "evolution requires n_steps >= 1");
  if (!(hbar > 0.0) || !(mass > 0.0)) raise(ErrorKind::InvalidArgument, "hbar and mass must be positive");
}

// ---------------------------------------------------------------------------

ExactPropagator::ExactPropagator(const MatrixXcd& liouvillian, double hbar)
    : exp_(liouvillian), hbar_(hbar) {
  if (!(hbar > 0.0)) raise(ErrorKind::InvalidArgument, "hbar must be positive");
}

MatrixXcd ExactPropagator::apply(const MatrixXcd& rho0, double t) const {
  return unvectorize(apply(vectorize(rho0), t), rho0.rows());
}

MatrixXcd evolve_exact(const BasisLiouvillian& l, const MatrixXcd& rho0, double t, double hbar) {
  if (t == 0.0) return rho0;
  return ExactPropagator(l.dense(), hbar).apply(rho0, t);
}

SuperDensity evolve_exact(const GridLiouvillian& l, const SuperDensity& rho0, double t) {
  if (t == 0.0) return rho0;
  SuperDensity out = rho0;
  out.values = ExactPropagator(l.dense(), l.hbar()).apply(rho0.values, t);
  return out;
}

VectorXcd evolve_ordered(const TimeDependentGenerator& l, const VectorXcd& rho0, double t0, double t1,
                         int n_steps, double hbar) {
  if (n_steps < 1) raise(ErrorKind::InvalidArgument, "n_steps must be >= 1");
  const double eps = (t1 - t0) / n_steps;
  VectorXcd v = rho0;
  for (int k = 0; k < n_steps; ++k) {
    const double mid = t0 + (k + 0.5) * eps;
    v = DenseExponential(l(mid)).apply(v, eps / hbar);
  }
  return v;
}

VectorXcd evolve_interaction_picture(const MatrixXcd& l0, const MatrixXcd& l_prime,
                                     const VectorXcd& rho0, double t0, double t1, int n_steps,
                                     double hbar) {
  const DenseExponential u0(l0);
  auto rotated = [&](double t) -> MatrixXcd {
    const double s = (t - t0) / hbar;
    return u0.matrix(-s) * l_prime * u0.matrix(s);
  };
  const VectorXcd sigma = evolve_ordered(rotated, rho0, t0, t1, n_steps, hbar);
  return u0.apply(sigma, (t1 - t0) / hbar);
}

VectorXcd interaction_picture_first_order(const MatrixXcd& l0, const MatrixXcd& l_prime,
                                          const VectorXcd& rho0, double t, int n_quadrature,
                                          double hbar) {
  const DenseExponential u0(l0);
  const GaussRule rule = gauss_legendre(n_quadrature);
  VectorXcd integral = VectorXcd::Zero(rho0.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = 0.5 * t * (rule.nodes[k] + 1.0);
    const VectorXcd forward = u0.apply(rho0, tau / hbar);
    const VectorXcd back = u0.apply(l_prime * forward, -tau / hbar);
    integral += (0.5 * t * rule.weights[k]) * back;
  }
  return u0.apply(rho0 - (kI / hbar) * integral, t / hbar);
}

// ---------------------------------------------------------------------------

namespace {

void require_grid_shape(const SuperGrid& grid, const SuperDensity& rho) {
  grid.validate();
  if (rho.values.rows() != grid.n || rho.values.cols() != grid.n ||
      std::abs(rho.grid.min - grid.min) > 1e-12 * std::max(1.0, std::abs(grid.min)) ||
      std::abs(rho.grid.max - grid.max) > 1e-12 * std::max(1.0, std::abs(grid.max))) {
    raise(ErrorKind::GridMismatch, "initial density is not on the evolution grid");
  }
}

}  // namespace

SuperDensity evolve_trotter(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                            const SuperDensity& rho0, const EvolutionConfig& config,
                            const GridObserver& observer) {
  config.validate();
  require_grid_shape(grid, rho0);
  if (config.method != Method::TrotterLie && config.method != Method::TrotterStrang) {
    raise(ErrorKind::InvalidArgument, "evolve_trotter needs a Trotter method");
  }
  const int n = grid.n;
  const double eps = config.step();
  const double hbar = config.hbar;
  const bool strang = config.method == Method::TrotterStrang;

  const VectorXd k = fft_wavenumbers(n, grid.spacing());
  const VectorXd kin = (hbar * hbar / (2.0 * config.mass)) * k.array().square().matrix();
  MatrixXcd kinetic_phase(n, n);
  MatrixXcd potential_phase(n, n);
  const double potential_fraction = strang ? 0.5 : 1.0;
  const Dynamics effective = e_vanishes_identically(v) ? Dynamics::QM : kind;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      kinetic_phase(a, b) = std::exp(-kI * eps * (kin(a) - kin(b)) / hbar);
      const double sp = super_potential(v, effective, grid.coord(a), grid.coord(b));
      potential_phase(a, b) = std::exp(-kI * potential_fraction * eps * sp / hbar);
    }
  }

  SuperDensity rho = rho0;
  MatrixXcd& m = rho.values;
  for (int step = 0; step < config.n_steps; ++step) {
    m = m.cwiseProduct(potential_phase);
    fft2(m, false);
    m = m.cwiseProduct(kinetic_phase);
    fft2(m, true);
    if (strang) m = m.cwiseProduct(potential_phase);
    if (observer) observer(config.t0 + (step + 1) * eps, rho);
  }
  return rho;
}

SuperDensity evolve_rk4(const GridLiouvillian& l, const SuperDensity& rho0,
                        const EvolutionConfig& config, const GridObserver& observer) {
  config.validate();
  require_grid_shape(l.grid(), rho0);
  const double h = config.step();
  const cplx c = -kI / l.hbar();
  SuperDensity rho = rho0;
  for (int step = 0; step < config.n_steps; ++step) {
    const MatrixXcd& y = rho.values;
    const MatrixXcd k1 = c * l.apply(y);
    const MatrixXcd k2 = c * l.apply(y + 0.5 * h * k1);
    const MatrixXcd k3 = c * l.apply(y + 0.5 * h * k2);
    const MatrixXcd k4 = c * l.apply(y + h * k3);
    rho.values = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (observer) observer(config.t0 + (step + 1) * h, rho);
  }
  return rho;
}

SuperDensity evolve_grid(const PolynomialPotential& v, const SuperGrid& grid, Dynamics kind,
                         const SuperDensity& rho0, const EvolutionConfig& config,
                         const GridObserver& observer) {
  config.validate();
  switch (config.method) {
    case Method::TrotterLie:
    case Method::TrotterStrang:
      return evolve_trotter(v, grid, kind, rho0, config, observer);
    case Method::RK4:
      return evolve_rk4(GridLiouvillian(v, grid, kind, config.mass, config.hbar), rho0, config,
                        observer);
    case Method::MatrixExp: {
      require_grid_shape(grid, rho0);
      const GridLiouvillian l(v, grid, kind, config.mass, config.hbar);
      const ExactPropagator u(l.dense(), config.hbar);
      SuperDensity rho = rho0;
      for (int step = 1; step <= config.n_steps; ++step) {
        rho.values = u.apply(rho0.values, step * config.step());
        if (observer) observer(config.t0 + step * config.step(), rho);
      }
      return rho;
    }
  }
  raise(ErrorKind::InvalidArgument, "unknown evolution method");
}

// ---------------------------------------------------------------------------

CharacteristicsEnsemble gaussian_ensemble_random(double x0, double p0, double sigma_x,
                                                 double sigma_p, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) raise(ErrorKind::InvalidArgument, "ensemble needs at least one sample");
  CharacteristicsEnsemble out;
  out.rng_seed = seed;
  out.samples.reserve(n_samples);
  auto rng = make_stream(seed, 0);
  std::normal_distribution<double> nx(x0, sigma_x), np(p0, sigma_p);
  const double w = 1.0 / n_samples;
  for (int i = 0; i < n_samples; ++i) {
    const double x = nx(rng);
    const double p = np(rng);
    out.samples.push_back({x, p, w});
  }
  return out;
}

CharacteristicsEnsemble gaussian_ensemble_quadrature(double x0, double p0, double sigma_x,
                                                     double sigma_p, int n_per_axis) {
  const GaussRule rule = gauss_hermite(n_per_axis);
  CharacteristicsEnsemble out;
  out.samples.reserve(static_cast<std::size_t>(n_per_axis) * n_per_axis);
  for (int i = 0; i < n_per_axis; ++i) {
    for (int j = 0; j < n_per_axis; ++j) {
      const double w = rule.weights[i] * rule.weights[j];
      if (w <= 0.0) continue;
      out.samples.push_back({x0 + sigma_x * rule.nodes[i], p0 + sigma_p * rule.nodes[j], w});
    }
  }
  return out;
}

EnsembleMoments ensemble_moments(const CharacteristicsEnsemble& ensemble) {
  EnsembleMoments m;
  double total = 0.0;
  for (const auto& s : ensemble.samples) {
    total += s.weight;
    m.x += s.weight * s.x;
    m.p += s.weight * s.p;
    m.x2 += s.weight * s.x * s.x;
    m.p2 += s.weight * s.p * s.p;
    m.xp += s.weight * s.x * s.p;
  }
  if (total > 0.0) {
    m.x /= total;
    m.p /= total;
    m.x2 /= total;
    m.p2 /= total;
    m.xp /= total;
  }
  return m;
}

double default_characteristics_step(const PolynomialPotential& v, double mass) {
  const auto c = v.coefficients();
  if (c.size() > 2 && c[2] > 0.0) {
    const double period = 2.0 * kPi * std::sqrt(mass / (2.0 * c[2]));
    return std::min(0.01, period / 100.0);
  }
  return 0.01;
}

CharacteristicsReport evolve_characteristics(const PolynomialPotential& v,
                                             const CharacteristicsEnsemble& ensemble, double t,
                                             double dt, double mass, double drift_tol) {
  if (t < 0.0) raise(ErrorKind::NonpositiveTime, "characteristics need t >= 0");
  if (dt <= 0.0) {
    // Resolve the fastest local oscillation any sample can reach within t.
    dt = default_characteristics_step(v, mass);
    const PolynomialPotential curvature = v.derivative().derivative();
    double omega = 0.0;
    for (const auto& s : ensemble.samples) {
      const double reach = 2.0 * std::abs(s.x) + std::abs(s.p) * t / mass;
      omega = std::max({omega, std::abs(curvature(reach)), std::abs(curvature(-reach))});
    }
    omega = std::sqrt(omega / mass);
    if (omega > 0.0) dt = std::min(dt, 0.02 / omega);
  }
  CharacteristicsReport report;
  report.ensemble = ensemble;
  report.n_steps = t > 0.0 ? static_cast<int>(std::ceil(t / dt - 1e-12)) : 0;
  report.dt = report.n_steps > 0 ? t / report.n_steps : 0.0;
  if (report.n_steps == 0) return report;

  const PolynomialPotential force = v.derivative();
  // Fourth-order symmetric composition of leapfrog (Yoshida).
  const double cbrt2 = std::cbrt(2.0);
  const double w1 = 1.0 / (2.0 - cbrt2);
  const double w0 = -cbrt2 / (2.0 - cbrt2);
  const double stages[3] = {w1 * report.dt, w0 * report.dt, w1 * report.dt};

  auto energy = [&](double x, double p) { return 0.5 * p * p / mass + v(x); };
  double mean_abs_energy = 0.0;
  for (const auto& s : ensemble.samples) mean_abs_energy += s.weight * std::abs(energy(s.x, s.p));

  double worst = 0.0;
  for (auto& s : report.ensemble.samples) {
    const double e0 = energy(s.x, s.p);
    double x = s.x, p = s.p;
    for (int step = 0; step < report.n_steps; ++step) {
      for (double h : stages) {
        p -= 0.5 * h * force(x);
        x += h * p / mass;
        p -= 0.5 * h * force(x);
      }
    }
    s.x = x;
    s.p = p;
    const double scale = std::max({std::abs(e0), mean_abs_energy, 1e-300});
    worst = std::max(worst, std::abs(energy(x, p) - e0) / scale);
  }
  report.drift_per_unit_time = worst / t;
  if (report.drift_per_unit_time > drift_tol) {
    raise(ErrorKind::EnergyDriftExceeded,
          "relative energy drift per unit time " + std::to_string(report.drift_per_unit_time));
  }
  return report;
}

}  // namespace superdyn
