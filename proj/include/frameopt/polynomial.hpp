#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace frameopt {

/// Exponent vector alpha of a monomial x^alpha.
using Exponent = std::vector<int>;

Exponent operator+(const Exponent& a, const Exponent& b);
int total_degree(const Exponent& e);
Exponent unit_exponent(int num_vars, int var, int power = 1);

/// All monomials in n variables of total degree <= r, graded lexicographic:
/// 1, x1, ..., xn, x1^2, x1 x2, ..., xn^2, ...
class MonomialBasis {
 public:
  /// Throws InvalidInput for n < 1, r < 0, or more than 10^6 monomials.
  MonomialBasis(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const Exponent& exponent(int index) const { return exponents_[static_cast<std::size_t>(index)]; }
  /// Position of alpha, or -1 when it is not in the basis.
  int index(const Exponent& alpha) const;
  /// Number of monomials of degree <= d (a prefix of this basis).
  int prefix_size(int d) const;

 private:
  static std::string key(const Exponent& alpha);

  int num_vars_;
  int degree_;
  std::vector<Exponent> exponents_;
  std::unordered_map<std::string, int> lookup_;
};

/// Binomial coefficient C(n + r, r) with overflow saturation.
std::int64_t basis_size(int num_vars, int degree);

struct PolyTerm {
  Exponent exponent;
  double coefficient = 0.0;
};

using Polynomial = std::vector<PolyTerm>;

struct MatrixPolyTerm {
  Exponent exponent;
  Eigen::MatrixXd coefficient;  // symmetric
};

/// Symmetric matrix whose entries are polynomials: sum_delta x^delta P_delta.
using MatrixPolynomial = std::vector<MatrixPolyTerm>;

int degree(const Polynomial& p);
int degree(const MatrixPolynomial& p);
double monomial_value(const Exponent& alpha, const Eigen::VectorXd& x);
double evaluate(const Polynomial& p, const Eigen::VectorXd& x);
Eigen::MatrixXd evaluate(const MatrixPolynomial& p, const Eigen::VectorXd& x);

/// minimize objective(x)  s.t.  g_j(x) >= 0,  P_k(x) PSD.
struct PolynomialProgram {
  int num_vars = 0;
  Polynomial objective;
  std::vector<Polynomial> scalar_constraints;
  std::vector<MatrixPolynomial> matrix_constraints;
};

}  // namespace frameopt
