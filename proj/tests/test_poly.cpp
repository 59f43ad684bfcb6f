#include "helpers.hpp"

#include <cmath>

using namespace testing;

namespace {

RationalPolynomial rp(std::vector<long> c) {
  std::vector<Rational> q;
  for (long x : c) q.emplace_back(x);
  return RationalPolynomial(q);
}

}  // namespace

TEST_CASE("polynomial arithmetic") {
  const RationalPolynomial a = rp({-1, 0, 1});  // x^2 - 1
  const RationalPolynomial b = rp({1, 1});      // x + 1
  CHECK(a.degree() == 2);
  CHECK(RationalPolynomial().degree() == -1);
  CHECK((a * b) == rp({-1, -1, 1, 1}));
  CHECK((a - a).is_zero());
  CHECK(a.derivative() == rp({0, 2}));
  CHECK(a(Rational(3)) == 8);
  RationalPolynomial q, r;
  divide(a, b, q, r);
  CHECK(q == rp({-1, 1}));
  CHECK(r.is_zero());
  CHECK(gcd(a, rp({-1, 1}) * rp({2, 1})) == rp({-1, 1}));
  CHECK(gcd(RationalPolynomial(), RationalPolynomial()).is_zero());
  CHECK(monic(rp({2, 4})) == RationalPolynomial({Rational(1, 2), Rational(1)}));
}

TEST_CASE("squarefree decomposition") {
  // (x - 1)^2 (x + 2)^3
  const RationalPolynomial p = rp({-1, 1}) * rp({-1, 1}) * rp({2, 1}) * rp({2, 1}) * rp({2, 1});
  const auto f = squarefree_decomposition(p);
  REQUIRE(f.size() == 3);
  CHECK(f[0].degree() == 0);
  CHECK(f[1] == rp({-1, 1}));
  CHECK(f[2] == rp({2, 1}));
}

TEST_CASE("real roots with multiplicity") {
  // (x - 1)^2 (x + 2) (x^2 - 2)
  const RationalPolynomial p = rp({-1, 1}) * rp({-1, 1}) * rp({2, 1}) * rp({-2, 0, 1});
  const auto roots = real_roots(p);
  REQUIRE(roots.size() == 4);
  CHECK(roots[0].value == doctest::Approx(-2.0));
  CHECK(roots[1].value == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
  CHECK(roots[2].value == 1.0);
  CHECK(roots[2].multiplicity == 2);
  CHECK(roots[3].value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(real_roots(rp({1, 0, 1})).empty());
  CHECK(sign_at(p, Rational(0)) == -1);
}

TEST_CASE("close roots are separated") {
  const Rational eps(1, 1000000);
  std::vector<Rational> c1{Rational(-1), Rational(1)};
  std::vector<Rational> c2{Rational(-1) - eps, Rational(1)};
  const auto roots = real_roots(RationalPolynomial(c1) * RationalPolynomial(c2));
  REQUIRE(roots.size() == 2);
  CHECK(roots[1].value - roots[0].value == doctest::Approx(1e-6));
}

TEST_CASE("determinant and generic rank") {
  RationalPolyMatrix m(2, 2);
  m(0, 0) = rp({0, 1});
  m(0, 1) = rp({1});
  m(1, 0) = rp({0, 0, 1});
  m(1, 1) = rp({0, 1});
  CHECK(determinant(m).is_zero());
  CHECK(generic_rank(m) == 1);
  m(1, 1) = rp({1, 1});
  CHECK(determinant(m) == rp({0, 1}));
  CHECK(generic_rank(m) == 2);
}

TEST_CASE("rank-drop polynomials") {
  RealPolyMatrix one(1, 1);
  one(0, 0) = RealPolynomial({0.0, 1.0});
  RankDrop r = rank_drop_polynomial(one);
  CHECK(r.generic_rank == 1);
  CHECK(r.f == rp({0, 0, 1}));
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].value == 0.0);
  CHECK(r.roots[0].multiplicity == 2);
  CHECK(r.cross_validated);

  RealPolyMatrix diag(2, 2);
  diag(0, 0) = RealPolynomial({1.0});
  diag(1, 1) = RealPolynomial({-2.0, 1.0});
  r = rank_drop_polynomial(diag);
  CHECK(r.f == rp({4, -4, 1}));
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].value == 2.0);

  r = rank_drop_polynomial(RealPolyMatrix(2, 3));
  CHECK(r.generic_rank == 0);
  CHECK(r.f == rp({1}));
  CHECK(r.roots.empty());

  // Tall matrix: only common zeros of all maximal minors count.
  RealPolyMatrix tall(3, 1);
  tall(0, 0) = RealPolynomial({-1.0, 1.0});
  tall(1, 0) = RealPolynomial({1.0, -2.0, 1.0});
  tall(2, 0) = RealPolynomial({-1.0, 0.0, 1.0});
  r = rank_drop_polynomial(tall);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].value == 1.0);
  CHECK(r.minor_gcd == rp({-1, 1}));
}

TEST_CASE("polynomial matrix helpers") {
  Matrix c0(2, 1), c1(2, 1);
  c0 << 1, 2;
  c1 << 3, 4;
  const RealPolyMatrix m = from_coefficients({c0, c1});
  CHECK(m.degree() == 1);
  CHECK(evaluate(m, 2.0)(1, 0) == 10.0);
  Matrix left(1, 2);
  left << 1, -1;
  CHECK(evaluate(multiply(left, m), 1.0)(0, 0) == -2.0);
  const auto merged = merge_roots({{1.0, 1, {}, {}}, {1.0 + 1e-10, 2, {}, {}}, {2.0, 1, {}, {}}});
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].multiplicity == 2);
}
