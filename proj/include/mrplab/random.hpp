#pragma once

// Seeded generators for randomized test instances.

#include <random>

#include "mrplab/fields.hpp"

namespace mrplab {

using Rng = std::mt19937_64;

struct TreeSpec {
  int max_depth = 4;
  int min_branching = 2;
  int max_branching = 4;
  bool irregular = true;  // branching may differ between nodes of one level
};

FilteredTree random_tree(Rng& rng, const TreeSpec& spec = {});

// Weights drawn uniformly from [floor, 1] and normalized.
LeafMeasure random_measure(const FilteredTree& tree, Rng& rng, double floor = 0.05);

// Standard normal leaf values. With probability `degenerate`, the leaves
// under one random internal node are made constant.
Matrix random_terminal(const FilteredTree& tree, Rng& rng, Eigen::Index d,
                       double degenerate = 0.0);

// Random (gamma) with rows x cols per internal node.
PredictableProcess random_predictable(const FilteredTree& tree, Rng& rng, Eigen::Index rows,
                                      Eigen::Index cols);

// One-parameter polynomial field on (-2, 2) with base point 0: either a
// depth-2 binary tree with d = 1 or a depth-2 ternary tree with d = 2;
// zeta = zeta_0 + zeta_1 x with zeta_0 in [1, 2], zeta_1 in [-0.3, 0.3], and
// degree-1 xi.
AnalyticField random_polynomial_field(Rng& rng);

}  // namespace mrplab
