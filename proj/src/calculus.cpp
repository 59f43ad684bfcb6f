#include "mrplab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mrplab {

namespace {

Eigen::Index idx(NodeId v) { return static_cast<Eigen::Index>(v); }

void require_same_size(const FilteredTree& tree, const AdaptedProcess& x, const char* what) {
  if (static_cast<std::size_t>(x.values.rows()) != tree.size()) {
    std::ostringstream msg;
    msg << what << ": process has " << x.values.rows() << " nodes, tree has " << tree.size();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

double martingale_defect(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x) {
  require_same_size(tree, x, "martingale_defect");
  if (x.values.size() == 0) return 0.0;
  const Vector w = conditional_weights(tree, q);
  const double scale = std::max(1.0, x.values.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    const auto first = idx(n.first_child);
    const auto k = static_cast<Eigen::Index>(n.num_children);
    const Eigen::RowVectorXd mean = w.segment(first, k).transpose() * x.values.middleRows(first, k);
    worst = std::max(worst, (mean - x.values.row(idx(v))).cwiseAbs().maxCoeff());
  }
  return worst / scale;
}

bool is_martingale(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x,
                   double tol) {
  return martingale_defect(tree, q, x) <= tol;
}

void require_martingale(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x,
                        const char* what) {
  const double defect = martingale_defect(tree, q, x);
  if (defect > kMartingaleTolerance) {
    std::ostringstream msg;
    msg << what << ": process is not a martingale (relative defect " << defect << ")";
    throw ContractViolation(msg.str());
  }
}

AdaptedProcess martingale_from_terminal(const FilteredTree& tree, const LeafMeasure& q,
                                        const Matrix& psi) {
  AdaptedProcess s = conditional_expectation(tree, q, psi);
  require_martingale(tree, q, s, "martingale_from_terminal");
  return s;
}

AdaptedProcess density_process(const FilteredTree& tree, const LeafMeasure& p,
                               const LeafMeasure& q) {
  if (p.size() != q.size()) throw DimensionMismatch("density_process: measures differ in size");
  const Matrix ratio = q.weights().cwiseQuotient(p.weights());
  return conditional_expectation(tree, p, ratio);
}

Matrix increments(const FilteredTree& tree, const AdaptedProcess& x, NodeId v) {
  const Node& n = tree.node(v);
  return x.values.middleRows(idx(n.first_child), static_cast<Eigen::Index>(n.num_children))
             .rowwise() -
         x.values.row(idx(v));
}

AdaptedProcess stochastic_integral(const FilteredTree& tree, const PredictableProcess& gamma,
                                   const AdaptedProcess& x) {
  require_same_size(tree, x, "stochastic_integral");
  if (gamma.rows != static_cast<Eigen::Index>(x.dim())) {
    std::ostringstream msg;
    msg << "stochastic_integral: integrand has " << gamma.rows << " rows, process has dimension "
        << x.dim();
    throw DimensionMismatch(msg.str());
  }
  AdaptedProcess out;
  out.values = Matrix::Zero(x.values.rows(), gamma.cols);
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    const Matrix dx = increments(tree, x, v);
    const Matrix step = dx * gamma.at(v);
    for (std::size_t c = 0; c < n.num_children; ++c)
      out.values.row(idx(n.first_child + c)) =
          out.values.row(idx(v)) + step.row(static_cast<Eigen::Index>(c));
  }
  return out;
}

MatrixProcess quadratic_covariation(const FilteredTree& tree, const AdaptedProcess& x,
                                    const AdaptedProcess& y) {
  require_same_size(tree, x, "quadratic_covariation");
  require_same_size(tree, y, "quadratic_covariation");
  const auto m = static_cast<Eigen::Index>(x.dim());
  const auto d = static_cast<Eigen::Index>(y.dim());
  MatrixProcess qv;
  qv.values.assign(tree.size(), Matrix::Zero(m, d));
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    for (std::size_t c = 0; c < n.num_children; ++c) {
      const NodeId child = n.first_child + c;
      const Eigen::VectorXd dx = (x.at(child) - x.at(v)).transpose();
      const Eigen::VectorXd dy = (y.at(child) - y.at(v)).transpose();
      qv.values[child] = qv.values[v] + dx * dy.transpose();
    }
  }
  return qv;
}

SpectralData spectral_decomposition(const FilteredTree& tree, const LeafMeasure& p,
                                    const AdaptedProcess& x) {
  require_same_size(tree, x, "spectral_decomposition");
  require_martingale(tree, p, x, "spectral_decomposition");
  const auto m = static_cast<Eigen::Index>(x.dim());
  const Vector w = conditional_weights(tree, p);
  const Vector prob = node_probabilities(tree, p);
  SpectralData s;
  s.c.assign(tree.size(), Matrix());
  s.kappa.assign(tree.size(), Matrix());
  s.a = Vector::Zero(idx(tree.size()));
  s.mu = Vector::Zero(idx(tree.size()));
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    const Matrix dx = increments(tree, x, v);
    const auto wv = w.segment(idx(n.first_child), static_cast<Eigen::Index>(n.num_children));
    Matrix c = dx.transpose() * wv.asDiagonal() * dx;
    c = 0.5 * (c + c.transpose());
    const double a = c.trace();
    s.c[v] = c;
    s.a[idx(v)] = a;
    s.kappa[v] = a > 0.0 ? Matrix(gram_sqrt(wv.cwiseSqrt().asDiagonal() * dx) / std::sqrt(a))
                         : Matrix::Zero(m, m);
    s.mu[idx(v)] = prob[idx(v)] * a;
  }
  return s;
}

PredictableProcess minimal_integrand(const FilteredTree& tree, const PredictableProcess& gamma,
                                     const SpectralData& spectral, double rtol) {
  PredictableProcess beta = PredictableProcess::zeros(tree, gamma.rows, gamma.cols);
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Matrix& k = spectral.kappa[v];
    beta.at(v) = pseudo_inverse(k, rtol) * k * gamma.at(v);
  }
  return beta;
}

AdaptedProcess add_covariation(const FilteredTree& tree, const AdaptedProcess& y,
                               const AdaptedProcess& l) {
  const MatrixProcess qc = quadratic_covariation(tree, y, l);
  AdaptedProcess out = y;
  for (NodeId v = 0; v < tree.size(); ++v) out.values.row(idx(v)) += qc.values[v].col(0).transpose();
  return out;
}

GirsanovResult girsanov(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                        const LeafMeasure& q) {
  require_martingale(tree, p, x, "girsanov_transform");
  GirsanovResult r;
  r.z = density_process(tree, p, q);
  r.z_inverse.values = r.z.values.cwiseInverse();

  PredictableProcess z_minus = PredictableProcess::zeros(tree, 1, 1);
  PredictableProcess z_inverse_minus = PredictableProcess::zeros(tree, 1, 1);
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    z_minus.at(v)(0, 0) = r.z.values(idx(v), 0);
    z_inverse_minus.at(v)(0, 0) = r.z_inverse.values(idx(v), 0);
  }
  r.l_tilde = stochastic_integral(tree, z_minus, r.z_inverse);
  r.l = stochastic_integral(tree, z_inverse_minus, r.z);
  r.transformed = add_covariation(tree, x, r.l_tilde);
  require_martingale(tree, q, r.transformed, "girsanov_transform (result under Q)");
  return r;
}

AdaptedProcess girsanov_transform(const FilteredTree& tree, const LeafMeasure& p,
                                  const AdaptedProcess& x, const LeafMeasure& q) {
  return girsanov(tree, p, x, q).transformed;
}

}  // namespace mrplab
