#include "helpers.hpp"

using namespace testing;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("martingale checks") {
  const FilteredTree t = tree_of({2, 2});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const AdaptedProcess x = walk(t);
  CHECK(is_martingale(t, p, x));
  AdaptedProcess bad = x;
  bad.values(1, 0) += 0.5;
  CHECK_FALSE(is_martingale(t, p, bad));
  CHECK_THROWS_AS(require_martingale(t, p, bad, "test"), ContractViolation);
  CHECK_THROWS_AS(spectral_decomposition(t, p, bad), ContractViolation);
}

TEST_CASE("quadratic covariation") {
  const FilteredTree t = tree_of({2});
  const AdaptedProcess x = walk(t);
  const AdaptedProcess c{Matrix::Constant(3, 1, 4.0)};
  const MatrixProcess xc = quadratic_covariation(t, x, c);
  for (NodeId v = 0; v < t.size(); ++v) CHECK(xc.at(v).isZero());
  const MatrixProcess xx = quadratic_covariation(t, x, x);
  CHECK(xx.at(0)(0, 0) == 0.0);
  CHECK(xx.at(1)(0, 0) == 1.0);
  CHECK(xx.at(2)(0, 0) == 1.0);
}

TEST_CASE("covariation is bilinear and the integral matches path sums") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const FilteredTree t = random_tree(rng);
    const LeafMeasure q = random_measure(t, rng);
    const AdaptedProcess x = martingale_from_terminal(t, q, random_terminal(t, rng, 2));
    const AdaptedProcess y = martingale_from_terminal(t, q, random_terminal(t, rng, 1));
    const AdaptedProcess z = martingale_from_terminal(t, q, random_terminal(t, rng, 1));
    const AdaptedProcess mix{2.0 * y.values - 3.0 * z.values};
    const MatrixProcess a = quadratic_covariation(t, x, mix);
    const MatrixProcess b = quadratic_covariation(t, x, y);
    const MatrixProcess c = quadratic_covariation(t, x, z);
    const PredictableProcess g = random_predictable(t, rng, 2, 1);
    const AdaptedProcess integral = stochastic_integral(t, g, x);
    CHECK(is_martingale(t, q, integral));
    for (NodeId v = 0; v < t.size(); ++v) {
      CHECK(max_abs(a.at(v) - (2.0 * b.at(v) - 3.0 * c.at(v))) < 1e-10);
      // Walk up from v: sum of gamma_u^T (X_child - X_u) along the path.
      double path = 0.0;
      Matrix bracket = Matrix::Zero(2, 1);
      for (NodeId u = v; u != 0; u = t.node(u).parent) {
        const NodeId parent = t.node(u).parent;
        const Matrix dx = (x.at(u) - x.at(parent)).transpose();
        path += (g.at(parent).transpose() * dx)(0, 0);
        bracket += dx * (y.at(u) - y.at(parent));
      }
      CHECK(integral.values(static_cast<Eigen::Index>(v), 0) == doctest::Approx(path).epsilon(1e-12));
      CHECK(max_abs(b.at(v) - bracket) < 1e-12);
    }
  }
}

TEST_CASE("integrand dimension is validated") {
  const FilteredTree t = tree_of({2});
  CHECK_THROWS_AS(stochastic_integral(t, PredictableProcess::zeros(t, 2, 1), walk(t)), DimensionMismatch);
}

TEST_CASE("spectral decomposition") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const FilteredTree t = random_tree(rng);
    const LeafMeasure p = random_measure(t, rng);
    const AdaptedProcess x = martingale_from_terminal(t, p, random_terminal(t, rng, 3, 0.5));
    const SpectralData sd = spectral_decomposition(t, p, x);
    for (NodeId v = 0; v < t.num_internal(); ++v) {
      CHECK(sd.a[static_cast<Eigen::Index>(v)] == doctest::Approx(sd.c[v].trace()));
      CHECK(sd.mu[static_cast<Eigen::Index>(v)] ==
            doctest::Approx(node_probability(t, p, v) * sd.a[static_cast<Eigen::Index>(v)]));
      if (sd.charged(v)) {
        CHECK((sd.kappa[v] * sd.kappa[v]).trace() == doctest::Approx(1.0));
        CHECK(max_abs(sd.kappa[v] * sd.kappa[v] * sd.a[static_cast<Eigen::Index>(v)] - sd.c[v]) <
              1e-10 * std::max(1.0, sd.a[static_cast<Eigen::Index>(v)]));
      } else {
        CHECK(sd.kappa[v].isZero());
      }
    }
  }
}

TEST_CASE("minimal integrands: trivial cases") {
  const FilteredTree t = tree_of({2});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const AdaptedProcess x = walk(t);
  const SpectralData sd = spectral_decomposition(t, p, x);
  const PredictableProcess g = PredictableProcess::constant(t, Matrix::Constant(1, 1, 3.0));
  CHECK(minimal_integrand(t, g, sd).at(0)(0, 0) == doctest::Approx(3.0));

  const AdaptedProcess flat{Matrix::Zero(3, 1)};
  const SpectralData zero = spectral_decomposition(t, p, flat);
  CHECK(minimal_integrand(t, g, zero).at(0).isZero());
}

TEST_CASE("minimal integrands, norm inequalities and the isometry") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const FilteredTree t = random_tree(rng);
    const LeafMeasure p = random_measure(t, rng);
    const AdaptedProcess x = martingale_from_terminal(t, p, random_terminal(t, rng, 3, 0.5));
    const SpectralData sd = spectral_decomposition(t, p, x);
    const PredictableProcess g = random_predictable(t, rng, 3, 1);
    const PredictableProcess beta = minimal_integrand(t, g, sd);
    const AdaptedProcess gx = stochastic_integral(t, g, x);
    const AdaptedProcess bx = stochastic_integral(t, beta, x);
    CHECK(max_abs(gx.values - bx.values) < 1e-10 * std::max(1.0, max_abs(gx.values)));
    double isometry = 0.0;
    for (NodeId v = 0; v < t.num_internal(); ++v) {
      const Matrix& k = sd.kappa[v];
      CHECK(beta.at(v).norm() <= g.at(v).norm() + 1e-12);
      CHECK((k * g.at(v)).norm() <= k.norm() * g.at(v).norm() + 1e-10);
      CHECK(beta.at(v).norm() <= pseudo_inverse(k).norm() * (k * beta.at(v)).norm() + 1e-10);
      isometry += sd.mu[static_cast<Eigen::Index>(v)] * (k * g.at(v)).squaredNorm();
    }
    const Vector terminal = terminal_values(t, gx).col(0);
    CHECK(p.weights().dot(terminal.cwiseProduct(terminal)) ==
          doctest::Approx(isometry).epsilon(1e-9));
  }
}

TEST_CASE("Girsanov transform") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const FilteredTree t = random_tree(rng);
    const LeafMeasure p = random_measure(t, rng);
    const LeafMeasure q = trial == 0 ? p : random_measure(t, rng);
    const AdaptedProcess x = martingale_from_terminal(t, p, random_terminal(t, rng, 2));
    const GirsanovResult g = girsanov(t, p, x, q);
    CHECK(is_martingale(t, q, g.transformed));
    CHECK(max_abs(g.z.values.cwiseProduct(g.z_inverse.values) - Matrix::Ones(g.z.values.rows(), 1)) <
          1e-12);
    const AdaptedProcess back = add_covariation(t, g.transformed, g.l);
    CHECK(max_abs(back.values - x.values) < 1e-10 * std::max(1.0, max_abs(x.values)));
    // Delta(Z Z~) = 0 so Z Z~ stays at its root value.
    if (trial == 0) CHECK(max_abs(g.transformed.values - x.values) < 1e-14);
    const AdaptedProcess round_trip = girsanov_transform(t, q, g.transformed, p);
    CHECK(max_abs(round_trip.values - x.values) < 1e-10 * std::max(1.0, max_abs(x.values)));
  }
}

TEST_CASE("density process") {
  const FilteredTree t = tree_of({2});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const LeafMeasure q = measure_of(t, {0.25, 0.75});
  const AdaptedProcess z = density_process(t, p, q);
  CHECK(z.values(0, 0) == doctest::Approx(1.0));
  CHECK(z.values(1, 0) == doctest::Approx(0.5));
  CHECK(z.values(2, 0) == doctest::Approx(1.5));
}
