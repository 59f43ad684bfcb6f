#include "mrplab/poly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mrplab/linalg.hpp"

namespace mrplab {

RationalPolynomial to_rational(const RealPolynomial& p) {
  std::vector<Rational> c;
  c.reserve(p.coefficients().size());
  for (double x : p.coefficients()) c.emplace_back(x);  // exact: every double is dyadic
  return RationalPolynomial(std::move(c));
}

RealPolynomial to_real(const RationalPolynomial& p) {
  std::vector<double> c;
  c.reserve(p.coefficients().size());
  for (const Rational& x : p.coefficients()) c.push_back(x.get_d());
  return RealPolynomial(std::move(c));
}

void divide(const RationalPolynomial& a, const RationalPolynomial& b, RationalPolynomial& quotient,
            RationalPolynomial& remainder) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  std::vector<Rational> r = a.coefficients();
  const int db = b.degree();
  const int da = a.degree();
  if (da < db) {
    quotient = {};
    remainder = a;
    return;
  }
  std::vector<Rational> q(static_cast<std::size_t>(da - db + 1), Rational(0));
  const Rational& lead = b.leading();
  const auto& bc = b.coefficients();
  for (int i = da - db; i >= 0; --i) {
    const Rational f = r[static_cast<std::size_t>(i + db)] / lead;
    q[static_cast<std::size_t>(i)] = f;
    if (f == 0) continue;
    for (int j = 0; j <= db; ++j)
      r[static_cast<std::size_t>(i + j)] -= f * bc[static_cast<std::size_t>(j)];
  }
  r.resize(static_cast<std::size_t>(db));
  quotient = RationalPolynomial(std::move(q));
  remainder = RationalPolynomial(std::move(r));
}

RationalPolynomial monic(const RationalPolynomial& p) {
  if (p.is_zero()) return p;
  return p * Rational(1 / p.leading());
}

RationalPolynomial gcd(RationalPolynomial a, RationalPolynomial b) {
  while (!b.is_zero()) {
    RationalPolynomial q, r;
    divide(a, b, q, r);
    a = std::move(b);
    b = monic(r);
  }
  return monic(a);
}

namespace {

RationalPolynomial exact_quotient(const RationalPolynomial& a, const RationalPolynomial& b) {
  RationalPolynomial q, r;
  divide(a, b, q, r);
  return q;
}

std::vector<RationalPolynomial> sturm_sequence(const RationalPolynomial& p) {
  std::vector<RationalPolynomial> seq{p, p.derivative()};
  while (!seq.back().is_zero() && seq.back().degree() > 0) {
    RationalPolynomial q, r;
    divide(seq[seq.size() - 2], seq.back(), q, r);
    if (r.is_zero()) break;
    // Positive rescaling keeps signs and tames coefficient growth.
    Rational s = abs(r.leading());
    seq.push_back(r * Rational(-1 / s));
  }
  if (seq.back().is_zero()) seq.pop_back();
  return seq;
}

int sign_changes(const std::vector<int>& signs) {
  int changes = 0;
  int last = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

int variations_at(const std::vector<RationalPolynomial>& seq, const Rational& x) {
  std::vector<int> s;
  s.reserve(seq.size());
  for (const auto& p : seq) s.push_back(sign_at(p, x));
  return sign_changes(s);
}

Rational root_bound(const RationalPolynomial& p) {
  Rational m(0);
  const auto& c = p.coefficients();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) m = std::max(m, Rational(abs(c[i] / p.leading())));
  // Round up to a power of two so bisection midpoints stay dyadic.
  Rational b(1);
  while (b <= m + 1) b *= 2;
  return b;
}

Rational midpoint(const Rational& a, const Rational& b) { return Rational((a + b) / 2); }

// Isolating intervals (lo, hi] of the distinct real roots of a squarefree p;
// lo == hi marks an exactly hit rational root.
std::vector<std::pair<Rational, Rational>> isolate(const RationalPolynomial& p) {
  std::vector<std::pair<Rational, Rational>> out;
  if (p.degree() <= 0) return out;
  const auto seq = sturm_sequence(p);
  const Rational bound = root_bound(p);
  struct Interval {
    Rational lo, hi;
    int vlo, vhi;
  };
  std::vector<Interval> stack;
  stack.push_back({Rational(-bound), bound, variations_at(seq, Rational(-bound)),
                   variations_at(seq, bound)});
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    const int count = iv.vlo - iv.vhi;
    if (count <= 0) continue;
    if (count == 1) {
      out.emplace_back(iv.lo, iv.hi);
      continue;
    }
    Rational mid = midpoint(iv.lo, iv.hi);
    if (sign_at(p, mid) == 0) {
      out.emplace_back(mid, mid);
      Rational delta = Rational((iv.hi - iv.lo) / 4);
      for (;;) {
        const Rational a = mid - delta;
        const Rational b = mid + delta;
        if (sign_at(p, a) != 0 && sign_at(p, b) != 0 &&
            variations_at(seq, a) - variations_at(seq, b) == 1)
          break;
        delta /= 2;
      }
      const Rational a = mid - delta;
      const Rational b = mid + delta;
      stack.push_back({iv.lo, a, iv.vlo, variations_at(seq, a)});
      stack.push_back({b, iv.hi, variations_at(seq, b), iv.vhi});
      continue;
    }
    const int vmid = variations_at(seq, mid);
    stack.push_back({iv.lo, mid, iv.vlo, vmid});
    stack.push_back({mid, iv.hi, vmid, iv.vhi});
  }
  return out;
}

RealRoot refine(const RationalPolynomial& p, Rational lo, Rational hi, double rel_width) {
  RealRoot root;
  if (lo != hi) {
    int slo = sign_at(p, lo);
    if (sign_at(p, hi) == 0) {
      lo = hi;
    } else {
      for (int it = 0; it < 400; ++it) {
        const double width = Rational(hi - lo).get_d();
        const double mag = std::max(1.0, std::abs(lo.get_d()));
        if (width < rel_width * mag) break;
        const Rational mid = midpoint(lo, hi);
        const int s = sign_at(p, mid);
        if (s == 0) {
          lo = hi = mid;
          break;
        }
        if (s == slo) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }
  root.lo = lo;
  root.hi = hi;
  root.value = midpoint(lo, hi).get_d();
  return root;
}

}  // namespace

int sign_at(const RationalPolynomial& p, const Rational& x) { return sgn(p(x)); }

std::vector<RationalPolynomial> squarefree_decomposition(const RationalPolynomial& p) {
  std::vector<RationalPolynomial> factors;
  if (p.degree() <= 0) return factors;
  const RationalPolynomial dp = p.derivative();
  const RationalPolynomial a0 = gcd(p, dp);
  RationalPolynomial b = exact_quotient(p, a0);
  RationalPolynomial c = exact_quotient(dp, a0);
  RationalPolynomial d = c - b.derivative();
  while (b.degree() > 0) {
    const RationalPolynomial a = gcd(b, d);
    factors.push_back(a);
    b = exact_quotient(b, a);
    c = exact_quotient(d, a);
    d = c - b.derivative();
  }
  return factors;
}

std::vector<RealRoot> real_roots(const RationalPolynomial& p, double rel_width) {
  std::vector<RealRoot> roots;
  const auto factors = squarefree_decomposition(p);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].degree() <= 0) continue;
    for (auto& [lo, hi] : isolate(factors[i])) {
      RealRoot r = refine(factors[i], lo, hi, rel_width);
      r.multiplicity = static_cast<int>(i) + 1;
      roots.push_back(std::move(r));
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
  return roots;
}

Eigen::MatrixXd evaluate(const RealPolyMatrix& m, double x) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j)(x);
  return out;
}

RationalPolyMatrix to_rational(const RealPolyMatrix& m) {
  RationalPolyMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = to_rational(m(i, j));
  return out;
}

RealPolyMatrix from_coefficients(const std::vector<Eigen::MatrixXd>& coefficients) {
  if (coefficients.empty()) return {};
  const auto rows = static_cast<std::size_t>(coefficients[0].rows());
  const auto cols = static_cast<std::size_t>(coefficients[0].cols());
  RealPolyMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::vector<double> c;
      for (const auto& mj : coefficients)
        c.push_back(mj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out(i, j) = RealPolynomial(std::move(c));
    }
  return out;
}

RealPolyMatrix multiply(const Eigen::MatrixXd& left, const RealPolyMatrix& m) {
  if (static_cast<std::size_t>(left.cols()) != m.rows())
    throw std::invalid_argument("multiply: shape mismatch");
  RealPolyMatrix out(static_cast<std::size_t>(left.rows()), m.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) {
      RealPolynomial acc;
      for (std::size_t k = 0; k < m.rows(); ++k)
        acc += m(k, j) * left(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      out(i, j) = acc;
    }
  return out;
}

RationalPolynomial determinant(const RationalPolyMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0) return RationalPolynomial::constant(Rational(1));
  if (n == 1) return m(0, 0);
  RationalPolynomial det;
  for (std::size_t j = 0; j < n; ++j) {
    if (m(0, j).is_zero()) continue;
    RationalPolyMatrix minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 0, cc = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    RationalPolynomial term = m(0, j) * determinant(minor);
    if (j % 2 == 1) term = -term;
    det += term;
  }
  return det;
}

namespace {

int rational_rank(std::vector<std::vector<Rational>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  int rank = 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (a[i][c] == 0) continue;
      const Rational f = a[i][c] / a[r][c];
      for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
    }
    ++r;
    ++rank;
  }
  return rank;
}

void for_each_subset(std::size_t n, std::size_t k,
                     const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

int generic_rank(const RationalPolyMatrix& m) {
  const std::size_t r = std::min(m.rows(), m.cols());
  if (r == 0) return 0;
  const int degree = std::max(0, m.degree());
  // A nonzero minor has degree <= r * degree, so one of r * degree + 1
  // distinct points is not among its roots.
  const long points = static_cast<long>(r) * degree + 1;
  int best = 0;
  for (long k = 0; k < points && best < static_cast<int>(r); ++k) {
    const Rational x(k);
    std::vector<std::vector<Rational>> a(m.rows(), std::vector<Rational>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = m(i, j)(x);
    best = std::max(best, rational_rank(std::move(a)));
  }
  return best;
}

std::vector<RealRoot> merge_roots(std::vector<RealRoot> roots, double distance) {
  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
  std::vector<RealRoot> out;
  for (auto& r : roots) {
    if (!out.empty() && std::abs(r.value - out.back().value) <= distance) {
      out.back().multiplicity = std::max(out.back().multiplicity, r.multiplicity);
      continue;
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

int numeric_rank_at(const RationalPolyMatrix& m, double x, double rtol) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j)(Rational(x)).get_d();
  const Vector sv = singular_values(a);
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  return classify_singular_values(sv, rtol * sv[0]).rank;
}

}  // namespace

RankDrop rank_drop_polynomial(const RationalPolyMatrix& m) {
  RankDrop out;
  out.generic_rank = generic_rank(m);
  if (out.generic_rank == 0) {
    out.f = RationalPolynomial::constant(Rational(1));
    out.minor_gcd = out.f;
    return out;
  }
  const auto r = static_cast<std::size_t>(out.generic_rank);
  for_each_subset(m.rows(), r, [&](const std::vector<std::size_t>& rows) {
    for_each_subset(m.cols(), r, [&](const std::vector<std::size_t>& cols) {
      RationalPolyMatrix sub(r, r);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) sub(i, j) = m(rows[i], cols[j]);
      const RationalPolynomial det = determinant(sub);
      out.f += det * det;
      out.minor_gcd = gcd(out.minor_gcd, det);
    });
  });
  out.roots = real_roots(out.minor_gcd);
  for (auto& root : out.roots) root.multiplicity *= 2;

  for (std::size_t i = 0; i < out.roots.size(); ++i) {
    const double x = out.roots[i].value;
    double h = 1e-3 * std::max(1.0, std::abs(x));
    if (i > 0) h = std::min(h, 0.5 * (x - out.roots[i - 1].value));
    if (i + 1 < out.roots.size()) h = std::min(h, 0.5 * (out.roots[i + 1].value - x));
    if (numeric_rank_at(m, x, 1e-7) >= out.generic_rank ||
        numeric_rank_at(m, x - h, 1e-12) != out.generic_rank ||
        numeric_rank_at(m, x + h, 1e-12) != out.generic_rank)
      out.cross_validated = false;
  }
  return out;
}

RankDrop rank_drop_polynomial(const RealPolyMatrix& m) { return rank_drop_polynomial(to_rational(m)); }

}  // namespace mrplab
