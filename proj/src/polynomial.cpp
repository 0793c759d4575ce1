#include "frameopt/polynomial.hpp"

#include "frameopt/errors.hpp"

#include <cmath>
#include <numeric>

namespace frameopt {

Exponent operator+(const Exponent& a, const Exponent& b) {
  if (a.size() != b.size()) throw InvalidInput("exponent length mismatch");
  Exponent s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
  return s;
}

int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

Exponent unit_exponent(int num_vars, int var, int power) {
  Exponent e(static_cast<std::size_t>(num_vars), 0);
  e.at(static_cast<std::size_t>(var)) = power;
  return e;
}

std::int64_t basis_size(int num_vars, int degree) {
  // C(n + r, r) computed incrementally; saturates well above the guard.
  std::int64_t c = 1;
  for (int k = 1; k <= degree; ++k) {
    c = c * (num_vars + k) / k;
    if (c > (std::int64_t{1} << 40)) return c;
  }
  return c;
}

namespace {

void enumerate(int var, int remaining, Exponent& current, std::vector<Exponent>& out) {
  const int n = static_cast<int>(current.size());
  if (var == n - 1) {
    current[var] = remaining;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int p = remaining; p >= 0; --p) {
    current[var] = p;
    enumerate(var + 1, remaining - p, current, out);
  }
  current[var] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1) throw InvalidInput("monomial basis needs at least one variable");
  if (degree < 0) throw InvalidInput("monomial basis degree must be non-negative");
  if (basis_size(num_vars, degree) > 1'000'000)
    throw InvalidInput("monomial basis would exceed 10^6 monomials");
  Exponent current(static_cast<std::size_t>(num_vars), 0);
  for (int d = 0; d <= degree; ++d) enumerate(0, d, current, exponents_);
  lookup_.reserve(exponents_.size());
  for (std::size_t i = 0; i < exponents_.size(); ++i) lookup_.emplace(key(exponents_[i]), static_cast<int>(i));
}

std::string MonomialBasis::key(const Exponent& alpha) {
  std::string k(alpha.size(), '\0');
  for (std::size_t i = 0; i < alpha.size(); ++i) k[i] = static_cast<char>(alpha[i]);
  return k;
}

int MonomialBasis::index(const Exponent& alpha) const {
  if (static_cast<int>(alpha.size()) != num_vars_) return -1;
  for (int a : alpha)
    if (a < 0 || a > degree_) return -1;
  auto it = lookup_.find(key(alpha));
  return it == lookup_.end() ? -1 : it->second;
}

int MonomialBasis::prefix_size(int d) const {
  if (d < 0) return 0;
  return static_cast<int>(basis_size(num_vars_, std::min(d, degree_)));
}

int degree(const Polynomial& p) {
  int d = 0;
  for (const PolyTerm& t : p)
    if (t.coefficient != 0.0) d = std::max(d, total_degree(t.exponent));
  return d;
}

int degree(const MatrixPolynomial& p) {
  int d = 0;
  for (const MatrixPolyTerm& t : p)
    if (!t.coefficient.isZero(0.0)) d = std::max(d, total_degree(t.exponent));
  return d;
}

double monomial_value(const Exponent& alpha, const Eigen::VectorXd& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] != 0) v *= std::pow(x[static_cast<Eigen::Index>(i)], alpha[i]);
  return v;
}

double evaluate(const Polynomial& p, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const PolyTerm& t : p) v += t.coefficient * monomial_value(t.exponent, x);
  return v;
}

Eigen::MatrixXd evaluate(const MatrixPolynomial& p, const Eigen::VectorXd& x) {
  if (p.empty()) return {};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.front().coefficient.rows(), p.front().coefficient.cols());
  for (const MatrixPolyTerm& t : p) m += monomial_value(t.exponent, x) * t.coefficient;
  return m;
}

}  // namespace frameopt
