#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace superdyn {

/// Which superpotential drives the dynamics: quantum (von Neumann) or classical (Liouville).
enum class Dynamics { QM, CL };

std::string to_string(Dynamics kind);
Dynamics parse_dynamics(const std::string& text);

/// V(x) = Σ c_k x^k. Trailing zero coefficients are dropped on construction.
class PolynomialPotential {
 public:
  PolynomialPotential() = default;
  explicit PolynomialPotential(std::vector<double> coefficients);

  static PolynomialPotential monomial(int power, double coefficient);

  /// Degree of the polynomial; 0 for V ≡ 0.
  int degree() const;
  bool is_zero() const { return coeffs_.empty(); }
  std::span<const double> coefficients() const { return coeffs_; }

  double operator()(double x) const;
  PolynomialPotential derivative() const;
  /// V'(x) without materializing the derivative polynomial.
  double slope(double x) const;

 private:
  std::vector<double> coeffs_;
};

using Vec3 = Eigen::Vector3d;

/// V(χ) = -e²/|χ| in Gaussian units.
class CoulombPotential {
 public:
  explicit CoulombPotential(double charge_squared, double eps_reg = 1e-6);

  double charge_squared() const { return e2_; }
  double eps_reg() const { return eps_reg_; }

  double operator()(const Vec3& chi) const;
  Vec3 gradient(const Vec3& chi) const;

 private:
  double e2_;
  double eps_reg_;
};

/// QM: V(Q) - V(q). CL: (Q - q) V'((Q + q)/2).
double super_potential(const PolynomialPotential& v, Dynamics kind, double Q, double q);

/// ℰ(Q,q) = (Q - q) V'((Q + q)/2) - V(Q) + V(q); antisymmetric under Q ↔ q.
double e_superoperator(const PolynomialPotential& v, double Q, double q);

/// ℰ ≡ 0 exactly when the potential is at most quadratic.
bool e_vanishes_identically(const PolynomialPotential& v);

/// max |ℰ| over an n×n uniform grid on [lo, hi]², the numerical side of the vanishing check.
double max_abs_e_on_grid(const PolynomialPotential& v, double lo, double hi, int n);

/// ℰ(Q,q) = 4e²(Q² - q²)/|Q + q|³ - V(Q) + V(q) for the Coulomb potential.
/// Throws SingularRegion when |Q|, |q| or |Q + q| is within eps_reg of zero.
double coulomb_e_superoperator(const CoulombPotential& p, const Vec3& Q, const Vec3& q);

/// (λ/2)(Q₁ - q₁ - (Q₂ - q₂))(Q₁ + q₁ - (Q₂ + q₂))³, the classical superpotential of λ(x₁ - x₂)⁴.
double bipartite_super_potential(double lambda, double Q1, double q1, double Q2, double q2);

enum class MonomialClass { PureBra, PureKet, IntraSubsystemMixed, InterSpaceCross };

std::string to_string(MonomialClass cls);

/// Exponents of (Q₁, q₁, Q₂, q₂).
using Exponents = std::array<int, 4>;

/// Classification rule for a monomial in bra (Q) and ket (q) variables of two subsystems.
MonomialClass classify_monomial(const Exponents& exponents);

/// Sparse polynomial in (Q₁, q₁, Q₂, q₂).
class Polynomial4 {
 public:
  Polynomial4() = default;

  static Polynomial4 constant(double c);
  /// Linear form a₀Q₁ + a₁q₁ + a₂Q₂ + a₃q₂.
  static Polynomial4 linear(const std::array<double, 4>& coefficients);

  Polynomial4 operator*(const Polynomial4& other) const;
  Polynomial4 operator+(const Polynomial4& other) const;
  Polynomial4 operator-(const Polynomial4& other) const;
  Polynomial4 scaled(double factor) const;

  double evaluate(const std::array<double, 4>& point) const;
  const std::map<Exponents, double>& terms() const { return terms_; }

 private:
  void add(const Exponents& e, double c);

  std::map<Exponents, double> terms_;
};

struct ClassifiedMonomial {
  Exponents exponents;
  double coefficient;
  MonomialClass cls;

  double evaluate(const std::array<double, 4>& point) const;
};

/// Symbolic expansion of the classical bipartite superpotential.
Polynomial4 bipartite_cl_polynomial(double lambda);
/// V(Q₁ - Q₂) - V(q₁ - q₂) for V(x) = λx⁴.
Polynomial4 bipartite_qm_polynomial(double lambda);

/// Expanded and classified monomials of the classical bipartite superpotential.
std::vector<ClassifiedMonomial> classify_bipartite_terms(double lambda);

}  // namespace superdyn
