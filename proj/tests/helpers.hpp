#pragma once

#include <doctest.h>

#include <vector>

#include "mrplab/random.hpp"

namespace testing {

using namespace mrplab;

inline FilteredTree tree_of(std::vector<int> branching) { return build_tree(branching); }

inline LeafMeasure measure_of(const FilteredTree& tree, std::vector<double> w) {
  return LeafMeasure::from_weights(tree, w, {.normalize = true});
}

inline Matrix column(std::vector<double> v) {
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Symmetric +-1 random walk of the given length under the uniform measure.
inline AdaptedProcess walk(const FilteredTree& tree) {
  AdaptedProcess x{Matrix::Zero(static_cast<Eigen::Index>(tree.size()), 1)};
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    x.values(static_cast<Eigen::Index>(n.first_child), 0) = x.values(static_cast<Eigen::Index>(v), 0) + 1;
    x.values(static_cast<Eigen::Index>(n.first_child + 1), 0) = x.values(static_cast<Eigen::Index>(v), 0) - 1;
  }
  return x;
}

// Leaf-sum brute force of E^Q[psi | node v].
inline Matrix brute_conditional(const FilteredTree& tree, const LeafMeasure& q, const Matrix& psi,
                                NodeId v) {
  const Node& n = tree.node(v);
  Matrix acc = Matrix::Zero(1, psi.cols());
  double mass = 0;
  for (std::size_t l = n.leaf_begin; l < n.leaf_end; ++l) {
    acc += q[l] * psi.row(static_cast<Eigen::Index>(l));
    mass += q[l];
  }
  return acc / mass;
}

struct Instance {
  FilteredTree tree;
  LeafMeasure q;
  AdaptedProcess s;
};

// Randomized suite member: depth <= 4, branching 2..4, d in 1..3, some
// degenerate terminals.
inline Instance random_instance(Rng& rng) {
  FilteredTree tree = random_tree(rng);
  LeafMeasure q = random_measure(tree, rng);
  std::uniform_int_distribution<int> dim(1, 3);
  const Matrix psi = random_terminal(tree, rng, dim(rng), 0.3);
  AdaptedProcess s = martingale_from_terminal(tree, q, psi);
  return {std::move(tree), std::move(q), std::move(s)};
}

}  // namespace testing
