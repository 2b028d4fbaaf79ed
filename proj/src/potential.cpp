#include "superdyn/potential.hpp"

#include <algorithm>
#include <cmath>

#include "superdyn/errors.hpp"

namespace superdyn {

std::string to_string(Dynamics kind) { return kind == Dynamics::QM ? "qm" : "cl"; }

Dynamics parse_dynamics(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "qm") return Dynamics::QM;
  if (lower == "cl") return Dynamics::CL;
  raise(ErrorKind::InvalidArgument, "dynamics kind must be 'qm' or 'cl', got '" + text + "'");
}

PolynomialPotential::PolynomialPotential(std::vector<double> coefficients)
    : coeffs_(std::move(coefficients)) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) raise(ErrorKind::InvalidArgument, "non-finite potential coefficient");
  }
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

PolynomialPotential PolynomialPotential::monomial(int power, double coefficient) {
  if (power < 0) raise(ErrorKind::InvalidArgument, "negative monomial power");
  std::vector<double> c(static_cast<std::size_t>(power) + 1, 0.0);
  c.back() = coefficient;
  return PolynomialPotential(std::move(c));
}

int PolynomialPotential::degree() const {
  return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1;
}

double PolynomialPotential::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

PolynomialPotential PolynomialPotential::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return PolynomialPotential(std::move(d));
}

double PolynomialPotential::slope(double x) const {
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coeffs_[k];
  return acc;
}

CoulombPotential::CoulombPotential(double charge_squared, double eps_reg)
    : e2_(charge_squared), eps_reg_(eps_reg) {
  if (!(charge_squared > 0.0)) raise(ErrorKind::InvalidArgument, "Coulomb e^2 must be positive");
  if (!(eps_reg > 0.0)) raise(ErrorKind::InvalidArgument, "regularization threshold must be positive");
}

double CoulombPotential::operator()(const Vec3& chi) const { return -e2_ / chi.norm(); }

Vec3 CoulombPotential::gradient(const Vec3& chi) const {
  const double r = chi.norm();
  return e2_ * chi / (r * r * r);
}

double super_potential(const PolynomialPotential& v, Dynamics kind, double Q, double q) {
  if (kind == Dynamics::QM) return v(Q) - v(q);
  return (Q - q) * v.slope(0.5 * (Q + q));
}

double e_superoperator(const PolynomialPotential& v, double Q, double q) {
  return super_potential(v, Dynamics::CL, Q, q) - super_potential(v, Dynamics::QM, Q, q);
}

bool e_vanishes_identically(const PolynomialPotential& v) { return v.degree() <= 2; }

double max_abs_e_on_grid(const PolynomialPotential& v, double lo, double hi, int n) {
  double worst = 0.0;
  const double h = n > 1 ? (hi - lo) / (n - 1) : 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      worst = std::max(worst, std::abs(e_superoperator(v, lo + i * h, lo + j * h)));
    }
  }
  return worst;
}

double coulomb_e_superoperator(const CoulombPotential& p, const Vec3& Q, const Vec3& q) {
  const double rQ = Q.norm();
  const double rq = q.norm();
  const Vec3 sum = Q + q;
  const double rs = sum.norm();
  if (rQ <= p.eps_reg() || rq <= p.eps_reg() || rs <= p.eps_reg()) {
    raise(ErrorKind::SingularRegion, "Coulomb superoperator evaluated inside the exclusion zone");
  }
  const double e2 = p.charge_squared();
  return 4.0 * e2 * (Q.squaredNorm() - q.squaredNorm()) / (rs * rs * rs) + e2 / rQ - e2 / rq;
}

double bipartite_super_potential(double lambda, double Q1, double q1, double Q2, double q2) {
  const double relative_difference = Q1 - q1 - (Q2 - q2);
  const double relative_sum = Q1 + q1 - (Q2 + q2);
  return 0.5 * lambda * relative_difference * relative_sum * relative_sum * relative_sum;
}

std::string to_string(MonomialClass cls) {
  switch (cls) {
    case MonomialClass::PureBra: return "PureBra";
    case MonomialClass::PureKet: return "PureKet";
    case MonomialClass::IntraSubsystemMixed: return "IntraSubsystemMixed";
    case MonomialClass::InterSpaceCross: return "InterSpaceCross";
  }
  return "Unknown";
}

MonomialClass classify_monomial(const Exponents& e) {
  // Index order (Q₁, q₁, Q₂, q₂).
  const bool bra1 = e[0] > 0, ket1 = e[1] > 0, bra2 = e[2] > 0, ket2 = e[3] > 0;
  const bool any_ket = ket1 || ket2;
  const bool any_bra = bra1 || bra2;
  if (!any_ket) return MonomialClass::PureBra;
  if (!any_bra) return MonomialClass::PureKet;
  if ((bra1 && ket2) || (bra2 && ket1)) return MonomialClass::InterSpaceCross;
  // Bra and ket variables present, all from one subsystem.
  return MonomialClass::IntraSubsystemMixed;
}

Polynomial4 Polynomial4::constant(double c) {
  Polynomial4 p;
  p.add({0, 0, 0, 0}, c);
  return p;
}

Polynomial4 Polynomial4::linear(const std::array<double, 4>& coefficients) {
  Polynomial4 p;
  for (int k = 0; k < 4; ++k) {
    Exponents e{0, 0, 0, 0};
    e[k] = 1;
    p.add(e, coefficients[k]);
  }
  return p;
}

void Polynomial4::add(const Exponents& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial4 Polynomial4::operator*(const Polynomial4& other) const {
  Polynomial4 out;
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : other.terms_) {
      Exponents e;
      for (int k = 0; k < 4; ++k) e[k] = ea[k] + eb[k];
      out.add(e, ca * cb);
    }
  }
  return out;
}

Polynomial4 Polynomial4::operator+(const Polynomial4& other) const {
  Polynomial4 out = *this;
  for (const auto& [e, c] : other.terms_) out.add(e, c);
  return out;
}

Polynomial4 Polynomial4::operator-(const Polynomial4& other) const {
  return *this + other.scaled(-1.0);
}

Polynomial4 Polynomial4::scaled(double factor) const {
  Polynomial4 out;
  for (const auto& [e, c] : terms_) out.add(e, c * factor);
  return out;
}

namespace {

double monomial_value(const Exponents& e, const std::array<double, 4>& x) {
  double v = 1.0;
  for (int k = 0; k < 4; ++k) {
    for (int p = 0; p < e[k]; ++p) v *= x[k];
  }
  return v;
}

}  // namespace

double Polynomial4::evaluate(const std::array<double, 4>& point) const {
  double acc = 0.0;
  for (const auto& [e, c] : terms_) acc += c * monomial_value(e, point);
  return acc;
}

double ClassifiedMonomial::evaluate(const std::array<double, 4>& point) const {
  return coefficient * monomial_value(exponents, point);
}

Polynomial4 bipartite_cl_polynomial(double lambda) {
  const Polynomial4 difference = Polynomial4::linear({1.0, -1.0, -1.0, 1.0});
  const Polynomial4 sum = Polynomial4::linear({1.0, 1.0, -1.0, -1.0});
  return (difference * sum * sum * sum).scaled(0.5 * lambda);
}

Polynomial4 bipartite_qm_polynomial(double lambda) {
  const Polynomial4 bra = Polynomial4::linear({1.0, 0.0, -1.0, 0.0});
  const Polynomial4 ket = Polynomial4::linear({0.0, 1.0, 0.0, -1.0});
  const Polynomial4 bra2 = bra * bra;
  const Polynomial4 ket2 = ket * ket;
  return (bra2 * bra2 - ket2 * ket2).scaled(lambda);
}

std::vector<ClassifiedMonomial> classify_bipartite_terms(double lambda) {
  std::vector<ClassifiedMonomial> out;
  const Polynomial4 poly = bipartite_cl_polynomial(lambda);
  for (const auto& [e, c] : poly.terms()) {
    out.push_back({e, c, classify_monomial(e)});
  }
  return out;
}

}  // namespace superdyn
