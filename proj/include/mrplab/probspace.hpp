#pragma once

// Finite filtered probability spaces encoded as rooted trees.
//
// Nodes are numbered breadth-first, so the atoms of F_t are exactly the
// depth-t nodes and every level (and every child list) is a contiguous
// index range. Leaves are the atoms of F = F_T.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using NodeId = std::size_t;

class MalformedFiltration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonEquivalentMeasure : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NormalizationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an input violates a mathematical precondition that cannot be
// checked by its type, e.g. "X is a P-martingale".
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Node {
  NodeId parent = 0;  // root is its own parent
  int depth = 0;
  NodeId first_child = 0;
  std::size_t num_children = 0;
  std::size_t leaf_begin = 0;  // leaves under this node: [leaf_begin, leaf_end)
  std::size_t leaf_end = 0;
};

class FilteredTree {
 public:
  // Every node at depth t has branching[t] children.
  static FilteredTree from_branching(std::span<const int> branching);

  // shape[t][i] is the child count of the i-th node at depth t.
  static FilteredTree from_shape(const std::vector<std::vector<int>>& shape);

  std::size_t size() const { return nodes_.size(); }
  int horizon() const { return horizon_; }
  std::size_t num_leaves() const { return nodes_.size() - first_leaf_; }
  std::size_t num_internal() const { return first_leaf_; }

  const Node& node(NodeId v) const { return nodes_[v]; }
  bool is_leaf(NodeId v) const { return v >= first_leaf_; }
  NodeId leaf_node(std::size_t leaf) const { return first_leaf_ + leaf; }
  std::size_t leaf_index(NodeId v) const { return v - first_leaf_; }

  // Nodes at depth t occupy [level_begin(t), level_begin(t + 1)).
  NodeId level_begin(int t) const { return level_offsets_[static_cast<std::size_t>(t)]; }
  NodeId level_end(int t) const { return level_offsets_[static_cast<std::size_t>(t) + 1]; }

  std::size_t max_branching() const;

 private:
  FilteredTree() = default;
  void finalize();

  std::vector<Node> nodes_;
  std::vector<NodeId> level_offsets_;
  NodeId first_leaf_ = 0;
  int horizon_ = 0;
};

FilteredTree build_tree(std::span<const int> branching);

struct MeasureOptions {
  double tolerance = 1e-12;
  bool normalize = false;
};

// A strictly positive probability on the leaves. Strict positivity makes every
// pair of leaf measures equivalent.
class LeafMeasure {
 public:
  static LeafMeasure from_weights(const FilteredTree& tree, std::span<const double> weights,
                                  const MeasureOptions& options = {});
  static LeafMeasure uniform(const FilteredTree& tree);

  const Vector& weights() const { return weights_; }
  double operator[](std::size_t leaf) const { return weights_[static_cast<Eigen::Index>(leaf)]; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }

 private:
  Vector weights_;
};

LeafMeasure measure_from_weights(const FilteredTree& tree, std::span<const double> weights,
                                 const MeasureOptions& options = {});

// Node-indexed R^d values. Row v is the value on atom v.
struct AdaptedProcess {
  Matrix values;

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  auto at(NodeId v) const { return values.row(static_cast<Eigen::Index>(v)); }
  auto at(NodeId v) { return values.row(static_cast<Eigen::Index>(v)); }
};

// Matrix values on internal nodes, applied to the step from the node to its
// children. Leaf slots are left empty.
struct PredictableProcess {
  std::vector<Matrix> values;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  static PredictableProcess zeros(const FilteredTree& tree, Eigen::Index rows, Eigen::Index cols);
  static PredictableProcess constant(const FilteredTree& tree, const Matrix& value);

  const Matrix& at(NodeId v) const { return values[v]; }
  Matrix& at(NodeId v) { return values[v]; }
};

// Matrix-valued adapted process, e.g. the quadratic covariation [X, Y].
struct MatrixProcess {
  std::vector<Matrix> values;

  const Matrix& at(NodeId v) const { return values[v]; }
};

double node_probability(const FilteredTree& tree, const LeafMeasure& q, NodeId v);
Vector node_probabilities(const FilteredTree& tree, const LeafMeasure& q);

// Q(child | parent) for every non-root node; entry 0 (root) is 1.
Vector conditional_weights(const FilteredTree& tree, const LeafMeasure& q);

// E^Q[terminal | F_t] on every node; terminal has one row per leaf.
AdaptedProcess conditional_expectation(const FilteredTree& tree, const LeafMeasure& q,
                                       const Matrix& terminal);

// Leaf rows of an adapted process.
Matrix terminal_values(const FilteredTree& tree, const AdaptedProcess& x);

}  // namespace mrplab
