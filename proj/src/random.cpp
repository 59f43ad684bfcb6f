#include "mrplab/random.hpp"

namespace mrplab {

FilteredTree random_tree(Rng& rng, const TreeSpec& spec) {
  std::uniform_int_distribution<int> depth_dist(1, spec.max_depth);
  std::uniform_int_distribution<int> branch_dist(spec.min_branching, spec.max_branching);
  const int depth = depth_dist(rng);
  std::vector<std::vector<int>> shape;
  std::size_t level_size = 1;
  for (int t = 0; t < depth; ++t) {
    std::vector<int> level(level_size);
    const int common = branch_dist(rng);
    std::size_t next = 0;
    for (auto& k : level) {
      k = spec.irregular ? branch_dist(rng) : common;
      next += static_cast<std::size_t>(k);
    }
    shape.push_back(std::move(level));
    level_size = next;
  }
  return FilteredTree::from_shape(shape);
}

LeafMeasure random_measure(const FilteredTree& tree, Rng& rng, double floor) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> w(tree.num_leaves());
  for (auto& x : w) x = u(rng);
  return LeafMeasure::from_weights(tree, w, {.normalize = true});
}

Matrix random_terminal(const FilteredTree& tree, Rng& rng, Eigen::Index d, double degenerate) {
  std::normal_distribution<double> g;
  Matrix psi(static_cast<Eigen::Index>(tree.num_leaves()), d);
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) psi(i, j) = g(rng);
  std::bernoulli_distribution coin(degenerate);
  if (degenerate > 0.0 && coin(rng) && tree.num_internal() > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, tree.num_internal() - 1);
    const Node& n = tree.node(pick(rng));
    for (std::size_t leaf = n.leaf_begin + 1; leaf < n.leaf_end; ++leaf)
      psi.row(static_cast<Eigen::Index>(leaf)) = psi.row(static_cast<Eigen::Index>(n.leaf_begin));
  }
  return psi;
}

PredictableProcess random_predictable(const FilteredTree& tree, Rng& rng, Eigen::Index rows,
                                      Eigen::Index cols) {
  std::normal_distribution<double> g;
  PredictableProcess out = PredictableProcess::zeros(tree, rows, cols);
  for (NodeId v = 0; v < tree.num_internal(); ++v)
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out.at(v)(i, j) = g(rng);
  return out;
}

AnalyticField random_polynomial_field(Rng& rng) {
  std::bernoulli_distribution ternary(0.5);
  const bool tri = ternary(rng);
  const std::vector<int> branching(2, tri ? 3 : 2);
  FilteredTree tree = build_tree(branching);
  LeafMeasure p = random_measure(tree, rng);
  const auto leaves = static_cast<Eigen::Index>(tree.num_leaves());
  const Eigen::Index d = tri ? 2 : 1;
  std::uniform_real_distribution<double> z0(1.0, 2.0), z1(-0.3, 0.3);
  Matrix zeta(leaves, 2);
  for (Eigen::Index i = 0; i < leaves; ++i) {
    zeta(i, 0) = z0(rng);
    zeta(i, 1) = z1(rng);
  }
  Matrix xi0 = random_terminal(tree, rng, d);
  Matrix xi1 = random_terminal(tree, rng, d);
  return polynomial_field(std::move(tree), std::move(p), std::move(zeta), {xi0, xi1}, -2.0, 2.0,
                          0.0);
}

}  // namespace mrplab
