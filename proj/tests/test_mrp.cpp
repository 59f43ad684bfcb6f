#include "helpers.hpp"

using namespace testing;

TEST_CASE("binary walk has the MRP, a one-dimensional ternary step does not") {
  const FilteredTree bin = tree_of({2, 2});
  const LeafMeasure p = LeafMeasure::uniform(bin);
  const AdaptedProcess x = walk(bin);
  CHECK(check_mrp_direct(bin, p, x).has_mrp);
  CHECK(check_mrp_jacod(bin, p, x).has_mrp);
  CHECK(check_mrp_all(bin, p, x).decision == Decision::Pass);

  const FilteredTree tri = tree_of({3});
  const LeafMeasure u = LeafMeasure::uniform(tri);
  const AdaptedProcess s = martingale_from_terminal(tri, u, column({1, 0, -1}));
  const MrpVerdict d = check_mrp_direct(tri, u, s);
  CHECK_FALSE(d.has_mrp);
  REQUIRE(d.failing_nodes.size() == 1);
  CHECK(d.failing_nodes[0].node == 0);
  CHECK(d.failing_nodes[0].rank_found == 1);
  CHECK(d.failing_nodes[0].rank_required == 2);
  const MrpVerdict j = check_mrp_jacod(tri, u, s);
  CHECK_FALSE(j.has_mrp);
  CHECK(j.null_space_dim == 1);
  CHECK(check_mrp_all(tri, u, s).decision == Decision::Fail);
}

TEST_CASE("a flat node fails the MRP") {
  const FilteredTree t = tree_of({2, 2});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const AdaptedProcess s = martingale_from_terminal(t, p, column({1, 1, -1, -3}));
  const MrpVerdict d = check_mrp_direct(t, p, s);
  CHECK_FALSE(d.has_mrp);
  REQUIRE(d.failing_nodes.size() == 1);
  CHECK(d.failing_nodes[0].node == 1);
  CHECK_FALSE(check_mrp_jacod(t, p, s).has_mrp);
}

TEST_CASE("basis martingale has the MRP with padded dimension") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const FilteredTree t = random_tree(rng);
    const LeafMeasure q = random_measure(t, rng);
    const AdaptedProcess b = basis_martingale(t, q);
    CHECK(b.dim() == t.max_branching() - 1);
    CHECK(is_martingale(t, q, b));
    CHECK(check_mrp_direct(t, q, b).has_mrp);
  }
}

TEST_CASE("rank route agrees with the direct route on a binary tree") {
  Rng rng(13);
  const FilteredTree t = tree_of({2, 2, 2});
  const LeafMeasure p = random_measure(t, rng);
  const AdaptedProcess x = basis_martingale(t, p);
  std::bernoulli_distribution zero(0.3);
  std::normal_distribution<double> g;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PredictableProcess sigma = PredictableProcess::zeros(t, 1, 2);
    for (NodeId v = 0; v < t.num_internal(); ++v)
      for (Eigen::Index j = 0; j < 2; ++j) sigma.at(v)(0, j) = zero(rng) ? 0.0 : g(rng);
    const AdaptedProcess s = stochastic_integral(t, sigma, x);
    const MrpVerdict direct = check_mrp_direct(t, p, s);
    const MrpVerdict rank = check_mrp_rank(t, p, x, sigma);
    CHECK(direct.has_mrp == rank.has_mrp);
    failures += !direct.has_mrp;
  }
  CHECK(failures > 0);
}

TEST_CASE("rank route needs a reference with the MRP") {
  const FilteredTree t = tree_of({3});
  const LeafMeasure u = LeafMeasure::uniform(t);
  const AdaptedProcess x = martingale_from_terminal(t, u, column({1, 0, -1}));
  CHECK_THROWS_AS(check_mrp_rank(t, u, x, PredictableProcess::zeros(t, 1, 1)), ReferenceLacksMrp);
}

TEST_CASE("representation solves") {
  const FilteredTree t = tree_of({2, 2});
  const LeafMeasure p = measure_of(t, {0.1, 0.2, 0.3, 0.4});
  const AdaptedProcess s = martingale_from_terminal(t, p, column({1, -2, 3, 0.5}));
  const Representation self = solve_representation(t, p, s, s);
  REQUIRE(self.success);
  const AdaptedProcess back = stochastic_integral(t, self.integrand, s);
  CHECK(((back.values.rowwise() + s.values.row(0)) - s.values).cwiseAbs().maxCoeff() < 1e-12);

  const FilteredTree tri = tree_of({3});
  const LeafMeasure u = LeafMeasure::uniform(tri);
  const AdaptedProcess s3 = martingale_from_terminal(tri, u, column({1, 0, -1}));
  const AdaptedProcess m = martingale_from_terminal(tri, u, column({1, -2, 1}));
  const Representation r = solve_representation(tri, u, s3, m);
  CHECK_FALSE(r.success);
  REQUIRE(r.witness_node.has_value());
  CHECK(*r.witness_node == 0);
}

TEST_CASE("non-representable martingale from the Jacod null space") {
  Rng rng(14);
  int built = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Instance in = random_instance(rng);
    const auto witness = nonrepresentable_martingale(in.tree, in.q, in.s);
    const bool mrp = check_mrp_direct(in.tree, in.q, in.s).has_mrp;
    CHECK(witness.has_value() == !mrp);
    if (!witness) continue;
    ++built;
    CHECK(is_martingale(in.tree, in.q, *witness));
    CHECK_FALSE(solve_representation(in.tree, in.q, in.s, *witness).success);
    const Matrix null = jacod_null_space(in.tree, in.s);
    CHECK(null.cols() > 0);
    CHECK(null.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(built > 0);
}

TEST_CASE("sparse node-mass system matches the dense leaf system") {
  Rng rng(15);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance in = random_instance(rng);
    const MrpVerdict j = check_mrp_jacod(in.tree, in.q, in.s);
    CHECK(j.null_space_dim == jacod_null_space(in.tree, in.s).cols());
  }
}

TEST_CASE("null integrals agree with kappa gamma = 0") {
  // Two coordinates moving together: kappa has rank one.
  const FilteredTree t = tree_of({2, 2});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const AdaptedProcess w = walk(t);
  AdaptedProcess x{Matrix(w.values.rows(), 2)};
  x.values << w.values, 2.0 * w.values;
  const SpectralData sd = spectral_decomposition(t, p, x);
  Matrix null(2, 1);
  null << 2, -1;
  CHECK(verify_null_integral(t, PredictableProcess::constant(t, null), x, sd));
  Matrix live(2, 1);
  live << 1, 1;
  CHECK_FALSE(verify_null_integral(t, PredictableProcess::constant(t, live), x, sd));
}

TEST_CASE("invariance under a change of measure") {
  const FilteredTree t = tree_of({2, 3});
  const LeafMeasure p = LeafMeasure::uniform(t);
  const LeafMeasure q = measure_of(t, {1, 2, 3, 4, 5, 6});
  Rng rng(15);
  const AdaptedProcess x = martingale_from_terminal(t, p, random_terminal(t, rng, 2));
  const AdaptedProcess m = martingale_from_terminal(t, p, random_terminal(t, rng, 1));
  const InvarianceReport self = mrp_invariance_report(t, p, x, p, {m});
  CHECK(self.ok());
  const InvarianceReport r = mrp_invariance_report(t, p, x, q, {m});
  CHECK(r.ok());
  CHECK(r.verdict_under_p);
  CHECK(mrp_invariance_check(t, p, x, q));
}

TEST_CASE("decision labels") {
  CHECK(std::string(to_string(Decision::Pass)) == "pass");
  CHECK(std::string(to_string(Decision::Disagree)) == "disagree");
  CHECK(std::string(to_string(MrpMethod::Jacod)) == "jacod");
}
