#include "mrplab/mrp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SPQRSupport>

namespace mrplab {

namespace {

Eigen::Index idx(NodeId v) { return static_cast<Eigen::Index>(v); }

// Increment entries at or below this fraction of max |S| are rounding noise
// from the conditional expectations that produced S, and are read as zero.
constexpr double kIncrementNoise = 1e-13;

double noise_floor(const AdaptedProcess& s) {
  return s.values.size() ? kIncrementNoise * s.values.cwiseAbs().maxCoeff() : 0.0;
}

Matrix resolved_increments(const FilteredTree& tree, const AdaptedProcess& s, NodeId v,
                           double floor) {
  const Matrix d = increments(tree, s, v);
  return (d.array().abs() <= floor).select(0.0, d);
}

struct NodeSpectrum {
  std::vector<Vector> sv;  // per internal node
  double scale = 0.0;      // largest singular value over all nodes
};

NodeSpectrum increment_spectrum(const FilteredTree& tree, const AdaptedProcess& s) {
  NodeSpectrum out;
  out.sv.resize(tree.num_internal());
  const double floor = noise_floor(s);
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    out.sv[v] = singular_values(resolved_increments(tree, s, v, floor));
    if (out.sv[v].size() > 0) out.scale = std::max(out.scale, out.sv[v][0]);
  }
  return out;
}

double required_singular_value(const Vector& sv, int required) {
  if (required <= 0) return std::numeric_limits<double>::infinity();
  if (sv.size() < required) return 0.0;
  return sv[required - 1];
}

}  // namespace

const char* to_string(MrpMethod m) {
  switch (m) {
    case MrpMethod::Direct: return "direct";
    case MrpMethod::Rank: return "rank";
    case MrpMethod::Jacod: return "jacod";
  }
  return "?";
}

const char* to_string(Decision d) {
  switch (d) {
    case Decision::Pass: return "pass";
    case Decision::Fail: return "fail";
    case Decision::Marginal: return "marginal";
    case Decision::Disagree: return "disagree";
  }
  return "?";
}

MrpVerdict check_mrp_direct(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& s,
                            const MrpOptions& options) {
  require_martingale(tree, q, s, "check_mrp_direct");
  MrpVerdict verdict;
  verdict.method = MrpMethod::Direct;
  verdict.tolerance = options.rank_tol;
  verdict.min_singular_value = std::numeric_limits<double>::infinity();

  const NodeSpectrum spec = increment_spectrum(tree, s);
  const double threshold = options.rank_tol * spec.scale;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const int required = static_cast<int>(tree.node(v).num_children) - 1;
    const RankInfo info = classify_singular_values(spec.sv[v], threshold);
    verdict.marginal = verdict.marginal || info.marginal;
    const double decisive = required_singular_value(spec.sv[v], required);
    verdict.min_singular_value = std::min(
        verdict.min_singular_value, spec.scale > 0.0 ? decisive / spec.scale : 0.0);
    if (info.rank < required) verdict.failing_nodes.push_back({v, info.rank, required});
  }
  verdict.has_mrp = verdict.failing_nodes.empty();
  return verdict;
}

MrpVerdict check_mrp_rank(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                          const PredictableProcess& sigma, const MrpOptions& options) {
  const MrpVerdict reference = check_mrp_direct(tree, p, x, options);
  if (!reference.has_mrp) throw ReferenceLacksMrp("check_mrp_rank: reference martingale lacks the MRP");
  if (sigma.rows != static_cast<Eigen::Index>(x.dim()))
    throw DimensionMismatch("check_mrp_rank: integrand rows must match the reference dimension");

  const SpectralData spectral = spectral_decomposition(tree, p, x);
  MrpVerdict verdict;
  verdict.method = MrpMethod::Rank;
  verdict.tolerance = options.rank_tol;
  verdict.marginal = reference.marginal;
  verdict.min_singular_value = std::numeric_limits<double>::infinity();

  std::vector<Vector> kappa_sv(tree.num_internal());
  std::vector<Vector> product_sv(tree.num_internal());
  double scale = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    if (!spectral.charged(v)) continue;
    kappa_sv[v] = singular_values(spectral.kappa[v]);
    product_sv[v] = singular_values(spectral.kappa[v] * sigma.at(v));
    if (product_sv[v].size() > 0) scale = std::max(scale, product_sv[v][0]);
  }
  const double threshold = options.rank_tol * scale;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    if (!spectral.charged(v)) continue;
    // kappa has unit trace-norm, so its own threshold is absolute.
    const RankInfo k = classify_singular_values(kappa_sv[v], options.rank_tol);
    const RankInfo ks = classify_singular_values(product_sv[v], threshold);
    verdict.marginal = verdict.marginal || k.marginal || ks.marginal;
    const double decisive = required_singular_value(product_sv[v], k.rank);
    verdict.min_singular_value =
        std::min(verdict.min_singular_value, scale > 0.0 ? decisive / scale : 0.0);
    if (ks.rank < k.rank) verdict.failing_nodes.push_back({v, ks.rank, k.rank});
  }
  verdict.has_mrp = verdict.failing_nodes.empty();
  return verdict;
}

namespace {

struct JacodSystem {
  Matrix a;
  double scale = 0.0;
};

JacodSystem jacod_system(const FilteredTree& tree, const AdaptedProcess& s) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  const auto leaves = static_cast<Eigen::Index>(tree.num_leaves());
  JacodSystem sys;
  const double floor = noise_floor(s);
  std::vector<Matrix> inc(tree.num_internal());
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    inc[v] = resolved_increments(tree, s, v, floor);
    sys.scale = std::max(sys.scale, inc[v].cwiseAbs().maxCoeff());
  }
  const double inv = sys.scale > 0.0 ? 1.0 / sys.scale : 0.0;

  sys.a = Matrix::Zero(1 + static_cast<Eigen::Index>(tree.num_internal()) * d, leaves);
  sys.a.row(0).setOnes();
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    for (std::size_t c = 0; c < n.num_children; ++c) {
      const Node& child = tree.node(n.first_child + c);
      const Eigen::RowVectorXd ds = inc[v].row(static_cast<Eigen::Index>(c)) * inv;
      for (Eigen::Index i = 0; i < d; ++i) {
        const Eigen::Index row = 1 + idx(v) * d + i;
        for (std::size_t leaf = child.leaf_begin; leaf < child.leaf_end; ++leaf)
          sys.a(row, static_cast<Eigen::Index>(leaf)) = ds[i];
      }
    }
  }
  return sys;
}

// The same uniqueness question in node-mass unknowns: every node carries its
// own mass, tied to its children by a consistency row. Equivalent to the leaf
// form (leaf masses determine the rest) but sparse.
Eigen::SparseMatrix<double> jacod_mass_system(const FilteredTree& tree, const AdaptedProcess& s) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  const double floor = noise_floor(s);
  std::vector<Matrix> inc(tree.num_internal());
  double scale = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    inc[v] = resolved_increments(tree, s, v, floor);
    scale = std::max(scale, inc[v].cwiseAbs().maxCoeff());
  }
  const double inv = scale > 0.0 ? 1.0 / scale : 0.0;

  std::vector<Eigen::Triplet<double>> entries;
  entries.emplace_back(0, 0, 1.0);
  Eigen::Index row = 1;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    entries.emplace_back(row, idx(v), 1.0);
    for (std::size_t c = 0; c < n.num_children; ++c)
      entries.emplace_back(row, idx(n.first_child + c), -1.0);
    ++row;
    for (Eigen::Index i = 0; i < d; ++i, ++row)
      for (std::size_t c = 0; c < n.num_children; ++c) {
        const double a = inc[v](static_cast<Eigen::Index>(c), i) * inv;
        if (a != 0.0) entries.emplace_back(row, idx(n.first_child + c), a);
      }
  }
  Eigen::SparseMatrix<double> a(row, idx(tree.size()));
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

// Child-mass deviation of a signed leaf perturbation n from the conditional
// law of q at node v. Zero iff Q + eps n has the same conditionals at v.
Vector conditional_deviation(const FilteredTree& tree, const Vector& q_nodes,
                             const Vector& n_nodes, NodeId v) {
  const Node& node = tree.node(v);
  Vector dev(static_cast<Eigen::Index>(node.num_children));
  const double qv = q_nodes[idx(v)];
  for (std::size_t c = 0; c < node.num_children; ++c) {
    const auto child = idx(node.first_child + c);
    dev[static_cast<Eigen::Index>(c)] =
        (n_nodes[child] - n_nodes[idx(v)] * q_nodes[child] / qv) / qv;
  }
  return dev;
}

Vector node_sums(const FilteredTree& tree, const Vector& leaf_values) {
  Vector out(idx(tree.size()));
  out.tail(leaf_values.size()) = leaf_values;
  for (NodeId v = tree.num_internal(); v-- > 0;) {
    const Node& n = tree.node(v);
    out[idx(v)] = out.segment(idx(n.first_child), static_cast<Eigen::Index>(n.num_children)).sum();
  }
  return out;
}

}  // namespace

Matrix jacod_null_space(const FilteredTree& tree, const AdaptedProcess& s,
                        const MrpOptions& options) {
  const JacodSystem sys = jacod_system(tree, s);
  Eigen::BDCSVD<Matrix> svd(sys.a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double threshold = options.rank_tol * (sv.size() > 0 ? sv[0] : 0.0);
  const RankInfo info = classify_singular_values(sv, threshold);
  const Eigen::Index cols = sys.a.cols();
  return svd.matrixV().rightCols(cols - info.rank);
}

MrpVerdict check_mrp_jacod(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& s,
                           const MrpOptions& options) {
  require_martingale(tree, q, s, "check_mrp_jacod");
  MrpVerdict verdict;
  verdict.method = MrpMethod::Jacod;
  verdict.tolerance = options.rank_tol;

  // Rows are O(1)-scaled, so the deferral threshold sits a decade under the
  // rank threshold and anything it drops is decisively zero.
  const Eigen::SparseMatrix<double> a = jacod_mass_system(tree, s);
  Eigen::SPQR<Eigen::SparseMatrix<double>> qr;
  qr.setPivotThreshold(options.rank_tol / 10.0);
  qr.compute(a);
  if (qr.info() != Eigen::Success) throw std::runtime_error("check_mrp_jacod: factorization failed");
  const Eigen::Index kept = qr.rank();
  Vector pivots(kept);
  for (Eigen::Index i = 0; i < kept; ++i) pivots[i] = std::abs(qr.matrixR().coeff(i, i));
  const double top = kept > 0 ? pivots.maxCoeff() : 0.0;
  const RankInfo info = classify_singular_values(pivots, options.rank_tol * top);
  verdict.marginal = info.marginal;
  verdict.null_space_dim = static_cast<int>(a.cols()) - info.rank;
  verdict.has_mrp = verdict.null_space_dim == 0;
  verdict.min_singular_value =
      verdict.has_mrp && top > 0.0 ? info.smallest_kept / top : 0.0;
  if (verdict.has_mrp) return verdict;

  // Localize: nodes where some equivalent martingale measure changes the
  // conditional law.
  const Matrix null = jacod_null_space(tree, s, options);
  const Vector q_nodes = node_sums(tree, q.weights());
  std::vector<Matrix> dev(tree.num_internal());
  double dev_scale = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v)
    dev[v] = Matrix::Zero(static_cast<Eigen::Index>(tree.node(v).num_children), null.cols());
  for (Eigen::Index j = 0; j < null.cols(); ++j) {
    const Vector n_nodes = node_sums(tree, null.col(j));
    for (NodeId v = 0; v < tree.num_internal(); ++v) {
      dev[v].col(j) = conditional_deviation(tree, q_nodes, n_nodes, v);
      dev_scale = std::max(dev_scale, dev[v].col(j).cwiseAbs().maxCoeff());
    }
  }
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const int local = classify_singular_values(singular_values(dev[v]), 1e-8 * dev_scale).rank;
    if (local > 0) {
      const int required = static_cast<int>(tree.node(v).num_children) - 1;
      verdict.failing_nodes.push_back({v, required - local, required});
    }
  }
  // The global count is authoritative; keep the verdict self-consistent even
  // if localization missed a node.
  if (verdict.failing_nodes.empty()) verdict.failing_nodes.push_back({0, 0, 0});
  return verdict;
}

AdaptedProcess basis_martingale(const FilteredTree& tree, const LeafMeasure& q) {
  const auto m = static_cast<Eigen::Index>(tree.max_branching()) - 1;
  const Vector w = conditional_weights(tree, q);
  AdaptedProcess x;
  x.values = Matrix::Zero(idx(tree.size()), m);
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    const auto k = static_cast<Eigen::Index>(n.num_children);
    const Vector wv = w.segment(idx(n.first_child), k);
    const Matrix basis = wv.cwiseSqrt().cwiseInverse().asDiagonal() *
                         orthogonal_complement(wv.cwiseSqrt());
    for (Eigen::Index c = 0; c < k; ++c) {
      const NodeId child = n.first_child + static_cast<std::size_t>(c);
      x.values.row(idx(child)) = x.values.row(idx(v));
      x.values.row(idx(child)).head(k - 1) += basis.row(c);
    }
  }
  return x;
}

Representation solve_representation(const FilteredTree& tree, const LeafMeasure& q,
                                    const AdaptedProcess& s, const AdaptedProcess& m,
                                    const SolveOptions& options) {
  require_martingale(tree, q, s, "solve_representation (integrator)");
  require_martingale(tree, q, m, "solve_representation (target)");
  const auto d = static_cast<Eigen::Index>(s.dim());
  const auto dm = static_cast<Eigen::Index>(m.dim());

  const NodeSpectrum spec = increment_spectrum(tree, s);
  const double threshold = options.rank_tol * spec.scale;
  const double s_floor = noise_floor(s);
  const double m_floor = noise_floor(m);
  double target_scale = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v)
    target_scale = std::max(target_scale, resolved_increments(tree, m, v, m_floor).norm());

  Representation rep;
  rep.integrand = PredictableProcess::zeros(tree, d, dm);
  rep.residual.assign(tree.size(), 0.0);
  rep.success = true;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Matrix ds = resolved_increments(tree, s, v, s_floor);
    const Matrix dmv = resolved_increments(tree, m, v, m_floor);
    const Matrix gamma = min_norm_solve(ds, dmv, threshold);
    const double res = (ds * gamma - dmv).norm();
    rep.integrand.at(v) = gamma;
    rep.residual[v] = res;
    if (res > options.residual_tol * std::max(dmv.norm(), target_scale)) {
      if (rep.success) rep.witness_node = v;
      rep.success = false;
    }
  }
  return rep;
}

bool verify_null_integral(const FilteredTree& tree, const PredictableProcess& gamma,
                          const AdaptedProcess& x, const SpectralData& spectral, double tol) {
  const AdaptedProcess integral = stochastic_integral(tree, gamma, x);
  double scale = 0.0;
  double worst_step = 0.0;
  double worst_kappa = 0.0;
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Matrix dx = increments(tree, x, v);
    scale = std::max(scale, gamma.at(v).norm() * dx.rowwise().norm().maxCoeff());
    worst_step = std::max(worst_step, increments(tree, integral, v).cwiseAbs().maxCoeff());
    if (spectral.charged(v))
      worst_kappa = std::max(worst_kappa, std::sqrt(spectral.a[idx(v)]) *
                                              (spectral.kappa[v] * gamma.at(v)).norm());
  }
  const bool integral_zero = worst_step <= tol * scale;
  const bool kappa_zero = worst_kappa <= tol * scale;
  if (integral_zero != kappa_zero) {
    std::ostringstream msg;
    msg << "verify_null_integral: gamma.X " << (integral_zero ? "vanishes" : "does not vanish")
        << " but kappa gamma " << (kappa_zero ? "vanishes" : "does not vanish")
        << " (max step " << worst_step << ", max |kappa gamma| " << worst_kappa << ")";
    throw InternalConsistencyError(msg.str());
  }
  return integral_zero;
}

std::optional<AdaptedProcess> nonrepresentable_martingale(const FilteredTree& tree,
                                                          const LeafMeasure& q,
                                                          const AdaptedProcess& s,
                                                          const MrpOptions& options) {
  const Matrix null = jacod_null_space(tree, s, options);
  if (null.cols() == 0) return std::nullopt;
  const Vector n = null.col(0);
  double eps = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n.size(); ++i)
    if (n[i] != 0.0) eps = std::min(eps, q.weights()[i] / std::abs(n[i]));
  eps *= 0.5;
  // dQ'/dQ for Q' = Q + eps n, another equivalent martingale measure for S.
  const Matrix density = (Vector::Ones(n.size()) + eps * n.cwiseQuotient(q.weights()));
  return conditional_expectation(tree, q, density);
}

InvarianceReport mrp_invariance_report(const FilteredTree& tree, const LeafMeasure& p,
                                       const AdaptedProcess& x, const LeafMeasure& q,
                                       const std::vector<AdaptedProcess>& test_martingales,
                                       const MrpOptions& options) {
  InvarianceReport report;
  report.verdict_under_p = check_mrp_direct(tree, p, x, options).has_mrp;
  const GirsanovResult g = girsanov(tree, p, x, q);
  report.verdict_under_q = check_mrp_direct(tree, q, g.transformed, options).has_mrp;
  report.verdicts_equal = report.verdict_under_p == report.verdict_under_q;

  for (const AdaptedProcess& m : test_martingales) {
    const Representation h = solve_representation(tree, p, x, m, {.rank_tol = options.rank_tol});
    if (!h.success) continue;
    const AdaptedProcess m_tilde = add_covariation(tree, m, g.l_tilde);
    AdaptedProcess rebuilt = stochastic_integral(tree, h.integrand, g.transformed);
    rebuilt.values.rowwise() += m_tilde.values.row(0);
    const double scale = std::max(1.0, m_tilde.values.cwiseAbs().maxCoeff());
    if ((rebuilt.values - m_tilde.values).cwiseAbs().maxCoeff() > 1e-9 * scale)
      report.same_integrand = false;
  }
  return report;
}

bool mrp_invariance_check(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                          const LeafMeasure& q, const MrpOptions& options) {
  return mrp_invariance_report(tree, p, x, q, {}, options).ok();
}

TripleVerdict check_mrp_all(const FilteredTree& tree, const LeafMeasure& q,
                            const AdaptedProcess& s, const MrpOptions& options) {
  TripleVerdict out;
  out.direct = check_mrp_direct(tree, q, s, options);
  const AdaptedProcess x = basis_martingale(tree, q);
  const Representation sigma =
      solve_representation(tree, q, x, s, {.rank_tol = options.rank_tol});
  out.rank = check_mrp_rank(tree, q, x, sigma.integrand, options);
  out.jacod = check_mrp_jacod(tree, q, s, options);

  if (out.direct.marginal || out.rank.marginal || out.jacod.marginal) {
    out.decision = Decision::Marginal;
  } else if (!sigma.success || out.direct.has_mrp != out.rank.has_mrp ||
             out.direct.has_mrp != out.jacod.has_mrp) {
    out.decision = Decision::Disagree;
  } else {
    out.decision = out.direct.has_mrp ? Decision::Pass : Decision::Fail;
  }
  return out;
}

}  // namespace mrplab
