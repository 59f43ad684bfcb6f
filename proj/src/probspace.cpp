#include "mrplab/probspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mrplab {

FilteredTree FilteredTree::from_branching(std::span<const int> branching) {
  std::vector<std::vector<int>> shape;
  std::size_t width = 1;
  for (int b : branching) {
    shape.emplace_back(width, b);
    if (b >= 2) width *= static_cast<std::size_t>(b);
  }
  return from_shape(shape);
}

FilteredTree FilteredTree::from_shape(const std::vector<std::vector<int>>& shape) {
  if (shape.empty()) throw MalformedFiltration("filtration needs at least one time step");
  FilteredTree tree;
  tree.nodes_.push_back(Node{});
  tree.level_offsets_.push_back(0);
  std::size_t level_size = 1;
  for (std::size_t t = 0; t < shape.size(); ++t) {
    const auto& counts = shape[t];
    if (counts.size() != level_size) {
      std::ostringstream msg;
      msg << "level " << t << " has " << level_size << " nodes but " << counts.size()
          << " child counts were given";
      throw MalformedFiltration(msg.str());
    }
    const NodeId begin = tree.level_offsets_.back();
    tree.level_offsets_.push_back(tree.nodes_.size());
    std::size_t next_size = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] < 2) {
        std::ostringstream msg;
        msg << "node " << begin + i << " at depth " << t << " has " << counts[i]
            << " children; every non-terminal atom must split into at least 2";
        throw MalformedFiltration(msg.str());
      }
      const NodeId parent = begin + i;
      tree.nodes_[parent].first_child = tree.nodes_.size();
      tree.nodes_[parent].num_children = static_cast<std::size_t>(counts[i]);
      for (int c = 0; c < counts[i]; ++c) {
        Node child;
        child.parent = parent;
        child.depth = static_cast<int>(t) + 1;
        tree.nodes_.push_back(child);
      }
      next_size += static_cast<std::size_t>(counts[i]);
    }
    level_size = next_size;
  }
  tree.level_offsets_.push_back(tree.nodes_.size());
  tree.horizon_ = static_cast<int>(shape.size());
  tree.first_leaf_ = tree.level_offsets_[shape.size()];
  tree.finalize();
  return tree;
}

void FilteredTree::finalize() {
  for (NodeId v = first_leaf_; v < nodes_.size(); ++v) {
    nodes_[v].leaf_begin = v - first_leaf_;
    nodes_[v].leaf_end = v - first_leaf_ + 1;
  }
  for (NodeId v = first_leaf_; v-- > 0;) {
    Node& n = nodes_[v];
    n.leaf_begin = nodes_[n.first_child].leaf_begin;
    n.leaf_end = nodes_[n.first_child + n.num_children - 1].leaf_end;
  }
}

std::size_t FilteredTree::max_branching() const {
  std::size_t b = 0;
  for (NodeId v = 0; v < first_leaf_; ++v) b = std::max(b, nodes_[v].num_children);
  return b;
}

FilteredTree build_tree(std::span<const int> branching) {
  return FilteredTree::from_branching(branching);
}

LeafMeasure LeafMeasure::from_weights(const FilteredTree& tree, std::span<const double> weights,
                                      const MeasureOptions& options) {
  if (weights.size() != tree.num_leaves()) {
    std::ostringstream msg;
    msg << "measure has " << weights.size() << " weights but the tree has " << tree.num_leaves()
        << " leaves";
    throw DimensionMismatch(msg.str());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      std::ostringstream msg;
      msg << "leaf " << i << " has weight " << weights[i]
          << "; measures must be strictly positive to be equivalent";
      throw NonEquivalentMeasure(msg.str());
    }
    total += weights[i];
  }
  LeafMeasure m;
  m.weights_ = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  if (std::abs(total - 1.0) > options.tolerance) {
    if (!options.normalize) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "weights sum to " << total << ", not 1";
      throw NormalizationError(msg.str());
    }
    m.weights_ /= total;
  }
  return m;
}

LeafMeasure LeafMeasure::uniform(const FilteredTree& tree) {
  std::vector<double> w(tree.num_leaves(), 1.0 / static_cast<double>(tree.num_leaves()));
  return from_weights(tree, w, {.tolerance = 1e-12, .normalize = true});
}

LeafMeasure measure_from_weights(const FilteredTree& tree, std::span<const double> weights,
                                 const MeasureOptions& options) {
  return LeafMeasure::from_weights(tree, weights, options);
}

PredictableProcess PredictableProcess::zeros(const FilteredTree& tree, Eigen::Index rows,
                                             Eigen::Index cols) {
  PredictableProcess p;
  p.rows = rows;
  p.cols = cols;
  p.values.resize(tree.size());
  for (NodeId v = 0; v < tree.num_internal(); ++v) p.values[v] = Matrix::Zero(rows, cols);
  return p;
}

PredictableProcess PredictableProcess::constant(const FilteredTree& tree, const Matrix& value) {
  PredictableProcess p = zeros(tree, value.rows(), value.cols());
  for (NodeId v = 0; v < tree.num_internal(); ++v) p.values[v] = value;
  return p;
}

double node_probability(const FilteredTree& tree, const LeafMeasure& q, NodeId v) {
  const Node& n = tree.node(v);
  return q.weights()
      .segment(static_cast<Eigen::Index>(n.leaf_begin),
               static_cast<Eigen::Index>(n.leaf_end - n.leaf_begin))
      .sum();
}

Vector node_probabilities(const FilteredTree& tree, const LeafMeasure& q) {
  Vector p(static_cast<Eigen::Index>(tree.size()));
  for (std::size_t i = 0; i < tree.num_leaves(); ++i)
    p[static_cast<Eigen::Index>(tree.leaf_node(i))] = q[i];
  for (NodeId v = tree.num_internal(); v-- > 0;) {
    const Node& n = tree.node(v);
    p[static_cast<Eigen::Index>(v)] =
        p.segment(static_cast<Eigen::Index>(n.first_child), static_cast<Eigen::Index>(n.num_children))
            .sum();
  }
  return p;
}

Vector conditional_weights(const FilteredTree& tree, const LeafMeasure& q) {
  const Vector p = node_probabilities(tree, q);
  Vector w(p.size());
  w[0] = 1.0;
  for (NodeId v = 1; v < tree.size(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    w[i] = p[i] / p[static_cast<Eigen::Index>(tree.node(v).parent)];
  }
  return w;
}

AdaptedProcess conditional_expectation(const FilteredTree& tree, const LeafMeasure& q,
                                       const Matrix& terminal) {
  if (static_cast<std::size_t>(terminal.rows()) != tree.num_leaves()) {
    std::ostringstream msg;
    msg << "terminal value has " << terminal.rows() << " rows but the tree has "
        << tree.num_leaves() << " leaves";
    throw DimensionMismatch(msg.str());
  }
  const Vector w = conditional_weights(tree, q);
  AdaptedProcess x;
  x.values.resize(static_cast<Eigen::Index>(tree.size()), terminal.cols());
  x.values.bottomRows(terminal.rows()) = terminal;
  for (NodeId v = tree.num_internal(); v-- > 0;) {
    const Node& n = tree.node(v);
    const auto first = static_cast<Eigen::Index>(n.first_child);
    const auto k = static_cast<Eigen::Index>(n.num_children);
    x.values.row(static_cast<Eigen::Index>(v)) =
        w.segment(first, k).transpose() * x.values.middleRows(first, k);
  }
  return x;
}

Matrix terminal_values(const FilteredTree& tree, const AdaptedProcess& x) {
  return x.values.bottomRows(static_cast<Eigen::Index>(tree.num_leaves()));
}

}  // namespace mrplab
