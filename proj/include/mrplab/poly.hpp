#pragma once

// Univariate polynomials over double or exact rationals, polynomial matrices,
// real-root isolation and the rank-drop polynomial of a matrix field.

#include <cstddef>
#include <string>
#include <vector>

#include <gmpxx.h>

#include <Eigen/Dense>

namespace mrplab {

using Rational = mpq_class;

template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<T> coefficients) : c_(std::move(coefficients)) { trim(); }
  static Polynomial constant(const T& value) { return Polynomial(std::vector<T>{value}); }
  static Polynomial monomial(const T& value, std::size_t degree) {
    std::vector<T> c(degree + 1, T(0));
    c[degree] = value;
    return Polynomial(std::move(c));
  }

  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coefficients() const { return c_; }
  T coefficient(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
  const T& leading() const { return c_.back(); }

  template <class X>
  X operator()(const X& x) const {
    X r(0);
    for (std::size_t i = c_.size(); i-- > 0;) r = X(r * x + X(c_[i]));
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<T> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = T(c_[i] * T(static_cast<long>(i)));
    return Polynomial(std::move(d));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    for (auto& x : c_) x *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= T(-1); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> r(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }
  std::vector<T> c_;
};

using RationalPolynomial = Polynomial<Rational>;
using RealPolynomial = Polynomial<double>;

RationalPolynomial to_rational(const RealPolynomial& p);
RealPolynomial to_real(const RationalPolynomial& p);

// Exact long division a = q b + r.
void divide(const RationalPolynomial& a, const RationalPolynomial& b, RationalPolynomial& quotient,
            RationalPolynomial& remainder);
RationalPolynomial monic(const RationalPolynomial& p);
// Monic gcd; gcd(0, 0) = 0.
RationalPolynomial gcd(RationalPolynomial a, RationalPolynomial b);

// Yun's algorithm: p = c * prod_i factors[i]^(i+1), factors squarefree and
// pairwise coprime (some may be constant 1).
std::vector<RationalPolynomial> squarefree_decomposition(const RationalPolynomial& p);

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
  // Exact isolating interval [lo, hi] (lo == hi when the root is rational and
  // was hit exactly).
  Rational lo;
  Rational hi;
};

// Distinct real roots with multiplicities, sorted ascending. Roots are
// refined until the isolating interval is narrower than rel_width * max(1, |x|).
std::vector<RealRoot> real_roots(const RationalPolynomial& p, double rel_width = 1e-15);

int sign_at(const RationalPolynomial& p, const Rational& x);

template <class T>
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Polynomial<T>& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const Polynomial<T>& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  int degree() const {
    int d = -1;
    for (const auto& p : e_) d = std::max(d, p.degree());
    return d;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Polynomial<T>> e_;
};

using RealPolyMatrix = PolyMatrix<double>;
using RationalPolyMatrix = PolyMatrix<Rational>;

Eigen::MatrixXd evaluate(const RealPolyMatrix& m, double x);
RationalPolyMatrix to_rational(const RealPolyMatrix& m);

// Coefficient matrices M_j with m(x) = sum_j M_j x^j.
RealPolyMatrix from_coefficients(const std::vector<Eigen::MatrixXd>& coefficients);

// Constant left factor times a polynomial matrix.
RealPolyMatrix multiply(const Eigen::MatrixXd& left, const RealPolyMatrix& m);

RationalPolynomial determinant(const RationalPolyMatrix& m);

// Rank of m(x) over the field of rational functions, computed exactly.
int generic_rank(const RationalPolyMatrix& m);

struct RankDrop {
  int generic_rank = 0;
  // f(x) = sum over maximal square minors of det(minor)^2; f = 1 when the
  // generic rank is zero.
  RationalPolynomial f;
  // gcd of the maximal minors; shares its real zero set with f.
  RationalPolynomial minor_gcd;
  std::vector<RealRoot> roots;  // multiplicities are those of f
  // Numeric cross-check: rank drops at each root and recovers nearby.
  bool cross_validated = true;
};

RankDrop rank_drop_polynomial(const RationalPolyMatrix& m);
RankDrop rank_drop_polynomial(const RealPolyMatrix& m);

// Merge roots whose values are within `distance` of each other (keeping the
// larger multiplicity).
std::vector<RealRoot> merge_roots(std::vector<RealRoot> roots, double distance = 1e-8);

}  // namespace mrplab
