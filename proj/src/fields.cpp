#include "mrplab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mrplab {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void require_polynomial(const AnalyticField& field, const char* what) {
  if (field.kind != FieldKind::Polynomial) {
    std::ostringstream msg;
    msg << what << " requires a polynomial field";
    throw PreconditionError(msg.str());
  }
}

}  // namespace

std::size_t AnalyticField::dim() const {
  if (kind == FieldKind::Exponential) return static_cast<std::size_t>(psi.cols());
  return xi_coeffs.empty() ? 0 : static_cast<std::size_t>(xi_coeffs[0].cols());
}

int AnalyticField::degree() const {
  return std::max(static_cast<int>(zeta_coeffs.cols()), static_cast<int>(xi_coeffs.size())) - 1;
}

AnalyticField polynomial_field(FilteredTree tree, LeafMeasure p, Matrix zeta_coeffs,
                               std::vector<Matrix> xi_coeffs, double lo, double hi,
                               double base_point) {
  const auto leaves = idx(tree.num_leaves());
  if (zeta_coeffs.rows() != leaves || zeta_coeffs.cols() == 0)
    throw DimensionMismatch("polynomial field: zeta coefficients must have one row per leaf");
  if (xi_coeffs.empty()) throw DimensionMismatch("polynomial field: xi needs at least one coefficient");
  for (const Matrix& c : xi_coeffs)
    if (c.rows() != leaves || c.cols() != xi_coeffs[0].cols())
      throw DimensionMismatch("polynomial field: xi coefficients must all be leaves x d");
  if (!(lo < hi)) throw std::invalid_argument("polynomial field: empty domain");
  AnalyticField f{.kind = FieldKind::Polynomial,
                  .tree = std::move(tree),
                  .p = std::move(p),
                  .zeta_coeffs = std::move(zeta_coeffs),
                  .xi_coeffs = std::move(xi_coeffs),
                  .base_density = {},
                  .psi = {}};
  f.domain_lo = lo;
  f.domain_hi = hi;
  f.base_point = base_point;
  return f;
}

Vector field_zeta(const AnalyticField& field, double x) {
  if (field.kind == FieldKind::Exponential) {
    const Vector& z = field.base_density;
    if (x == 0.0) return z;
    Vector out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      out[i] = -std::expm1(-x * z[i]) / x + x / (1.0 + x);
    return out;
  }
  Vector out = Vector::Zero(field.zeta_coeffs.rows());
  for (Eigen::Index j = field.zeta_coeffs.cols(); j-- > 0;) out = out * x + field.zeta_coeffs.col(j);
  return out;
}

Matrix field_xi(const AnalyticField& field, double x) {
  if (field.kind == FieldKind::Exponential) return field_zeta(field, x).asDiagonal() * field.psi;
  Matrix out = Matrix::Zero(field.xi_coeffs[0].rows(), field.xi_coeffs[0].cols());
  for (std::size_t j = field.xi_coeffs.size(); j-- > 0;) out = out * x + field.xi_coeffs[j];
  return out;
}

FieldPoint field_evaluate(const AnalyticField& field, double x) {
  const Vector zeta = field_zeta(field, x);
  for (Eigen::Index i = 0; i < zeta.size(); ++i) {
    if (!(zeta[i] > 0.0)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "zeta(" << x << ") = " << zeta[i] << " at leaf " << i << " is not positive";
      throw PositivityError(msg.str());
    }
  }
  const Vector weighted = field.p.weights().cwiseProduct(zeta);
  const Vector q = weighted / weighted.sum();
  FieldPoint out{.x = x,
                 .q = LeafMeasure::from_weights(field.tree, std::span<const double>(q.data(), q.size()),
                                                {.tolerance = 1e-12, .normalize = true}),
                 .s = {}};
  const Matrix terminal = zeta.cwiseInverse().asDiagonal() * field_xi(field, x);
  out.s = conditional_expectation(field.tree, out.q, terminal);
  return out;
}

AnalyticField theorem1_family(const FilteredTree& tree, const LeafMeasure& p, const LeafMeasure& r,
                              const Matrix& psi, const MrpOptions& options) {
  const AdaptedProcess s = martingale_from_terminal(tree, r, psi);
  if (!check_mrp_direct(tree, r, s, options).has_mrp)
    throw PreconditionError("theorem1_family: S^R = E^R[psi | F_t] does not have the MRP");
  AnalyticField f{.kind = FieldKind::Exponential,
                  .tree = tree,
                  .p = p,
                  .zeta_coeffs = {},
                  .xi_coeffs = {},
                  .base_density = r.weights().cwiseQuotient(p.weights()),
                  .psi = psi};
  f.domain_lo = 0.0;
  f.domain_hi = std::numeric_limits<double>::infinity();
  f.base_point = 0.0;
  return f;
}

double density_deviation(const AnalyticField& field, double x) {
  const Vector zeta = field_zeta(field, x);
  const double mean = field.p.weights().dot(zeta);
  return (zeta / mean - Vector::Ones(zeta.size())).cwiseAbs().maxCoeff();
}

TaylorReport taylor_check(const Vector& zeta, double y, int n_max) {
  TaylorReport report;
  report.y = y;
  const Eigen::Index leaves = zeta.size();
  Vector a = (-y * zeta).array().exp().matrix();  // A_0(y)
  const double below = y - 0.9 * y;
  const double above = y + 0.9 * y;
  const Vector exact_below = (-below * zeta).array().exp().matrix();
  const Vector exact_above = (-above * zeta).array().exp().matrix();
  Vector sum_below = Vector::Zero(leaves);
  Vector sum_above = Vector::Zero(leaves);
  double pow_below = 1.0;  // (x - y)^n
  double pow_above = 1.0;

  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) {
      a = a.cwiseProduct(-zeta) / static_cast<double>(n);
      pow_below *= below - y;
      pow_above *= above - y;
    }
    TaylorTerm term;
    term.n = n;
    term.sup_norm = leaves > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    term.bound = n == 0 ? 1.0
                        : std::exp(n * std::log(n / (std::exp(1.0) * y)) - std::lgamma(n + 1.0));
    term.holds = term.sup_norm <= term.bound * (1.0 + 1e-12);
    report.bound_holds = report.bound_holds && term.holds;
    report.terms.push_back(term);

    sum_below += a * pow_below;
    sum_above += a * pow_above;
    const double rb = leaves > 0 ? (sum_below - exact_below).cwiseAbs().maxCoeff() : 0.0;
    const double ra = leaves > 0 ? (sum_above - exact_above).cwiseAbs().maxCoeff() : 0.0;
    report.remainder_below.push_back(rb);
    report.remainder_above.push_back(ra);
    if (report.terms_to_tolerance < 0 && rb < 1e-10 && ra < 1e-10) report.terms_to_tolerance = n + 1;
  }

  // Tail majorant: sum_{k > n} (1/k!) (k/e)^k 0.9^k, independent of y.
  const int horizon = n_max + 4000;
  std::vector<double> t(static_cast<std::size_t>(horizon) + 1);
  for (int k = 1; k <= horizon; ++k)
    t[static_cast<std::size_t>(k)] =
        std::exp(k * std::log(k / std::exp(1.0)) - std::lgamma(k + 1.0) + k * std::log(0.9));
  t[0] = 1.0;
  std::vector<double> tail(static_cast<std::size_t>(horizon) + 2, 0.0);
  for (int k = horizon; k >= 0; --k)
    tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k) + 1] + t[static_cast<std::size_t>(k)];
  for (int n = 0; n <= n_max; ++n) report.remainder_bound.push_back(tail[static_cast<std::size_t>(n) + 1]);
  return report;
}

Matrix SigmaField::sigma(NodeId v, double x) const {
  const double yv = y[v](x);
  return evaluate(numerator[v], x) / (yv * yv);
}

SigmaField sigma_field(const AnalyticField& field, const AdaptedProcess& x_ref, int spot_checks,
                       unsigned seed) {
  require_polynomial(field, "sigma_field");
  const FilteredTree& tree = field.tree;
  const LeafMeasure& p = field.p;
  if (!check_mrp_direct(tree, p, x_ref).has_mrp)
    throw ReferenceLacksMrp("sigma_field: reference martingale lacks the MRP under P");
  const int degree = field.degree();
  const auto d = static_cast<Eigen::Index>(field.dim());
  const auto m = static_cast<Eigen::Index>(x_ref.dim());

  std::vector<AdaptedProcess> y_coef, r_coef;
  std::vector<Representation> alpha_coef, beta_coef;
  for (int j = 0; j <= degree; ++j) {
    const Matrix zj = j < field.zeta_coeffs.cols() ? Matrix(field.zeta_coeffs.col(j))
                                                   : Matrix::Zero(field.zeta_coeffs.rows(), 1);
    const Matrix xj = static_cast<std::size_t>(j) < field.xi_coeffs.size()
                          ? field.xi_coeffs[static_cast<std::size_t>(j)]
                          : Matrix::Zero(field.zeta_coeffs.rows(), d);
    y_coef.push_back(conditional_expectation(tree, p, zj));
    r_coef.push_back(conditional_expectation(tree, p, xj));
    alpha_coef.push_back(solve_representation(tree, p, x_ref, y_coef.back()));
    beta_coef.push_back(solve_representation(tree, p, x_ref, r_coef.back()));
  }

  SigmaField out;
  out.y.resize(tree.size());
  out.r.resize(tree.size());
  out.alpha_hat.resize(tree.size());
  out.beta_hat.resize(tree.size());
  out.numerator.resize(tree.size());
  for (NodeId v = 0; v < tree.size(); ++v) {
    std::vector<double> yc;
    std::vector<Matrix> rc;
    for (int j = 0; j <= degree; ++j) {
      yc.push_back(y_coef[static_cast<std::size_t>(j)].values(idx(v), 0));
      rc.push_back(r_coef[static_cast<std::size_t>(j)].at(v));
    }
    out.y[v] = RealPolynomial(yc);
    out.r[v] = from_coefficients(rc);
    if (tree.is_leaf(v)) continue;
    std::vector<Matrix> ac, bc;
    for (int j = 0; j <= degree; ++j) {
      ac.push_back(alpha_coef[static_cast<std::size_t>(j)].integrand.at(v));
      bc.push_back(beta_coef[static_cast<std::size_t>(j)].integrand.at(v));
    }
    out.alpha_hat[v] = from_coefficients(ac);
    out.beta_hat[v] = from_coefficients(bc);
    RealPolyMatrix num(static_cast<std::size_t>(m), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < num.rows(); ++i)
      for (std::size_t k = 0; k < num.cols(); ++k)
        num(i, k) = out.y[v] * out.beta_hat[v](i, k) - out.alpha_hat[v](i, 0) * out.r[v](0, k);
    out.numerator[v] = std::move(num);
  }

  // S + [S, alpha . X] = S_0 + sigma . X at sampled parameters.
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(field.domain_lo, field.domain_hi);
  for (int i = 0; i < spot_checks; ++i) {
    const double x = unif(rng);
    const FieldPoint fp = field_evaluate(field, x);
    PredictableProcess alpha = PredictableProcess::zeros(tree, m, 1);
    PredictableProcess sigma = PredictableProcess::zeros(tree, m, d);
    for (NodeId v = 0; v < tree.num_internal(); ++v) {
      alpha.at(v) = evaluate(out.alpha_hat[v], x) / out.y[v](x);
      sigma.at(v) = out.sigma(v, x);
    }
    const AdaptedProcess lhs = add_covariation(tree, fp.s, stochastic_integral(tree, alpha, x_ref));
    AdaptedProcess rhs = stochastic_integral(tree, sigma, x_ref);
    rhs.values.rowwise() += fp.s.values.row(0);
    const double scale = std::max(1.0, fp.s.values.cwiseAbs().maxCoeff());
    out.max_spot_check_error =
        std::max(out.max_spot_check_error, (lhs.values - rhs.values).cwiseAbs().maxCoeff() / scale);
  }
  return out;
}

std::vector<RationalPolyMatrix> increment_polynomials(const AnalyticField& field) {
  require_polynomial(field, "increment_polynomials");
  const FilteredTree& tree = field.tree;
  const std::size_t d = field.dim();
  const int degree = field.degree();

  std::vector<Rational> prob(tree.size());
  for (std::size_t i = 0; i < tree.num_leaves(); ++i) prob[tree.leaf_node(i)] = Rational(field.p[i]);
  for (NodeId v = tree.num_internal(); v-- > 0;) {
    const Node& n = tree.node(v);
    prob[v] = 0;
    for (std::size_t c = 0; c < n.num_children; ++c) prob[v] += prob[n.first_child + c];
  }

  std::vector<RationalPolynomial> y(tree.size());
  std::vector<std::vector<RationalPolynomial>> r(tree.size(), std::vector<RationalPolynomial>(d));
  for (std::size_t i = 0; i < tree.num_leaves(); ++i) {
    const NodeId v = tree.leaf_node(i);
    std::vector<Rational> yc;
    for (Eigen::Index j = 0; j < field.zeta_coeffs.cols(); ++j)
      yc.emplace_back(field.zeta_coeffs(idx(i), j));
    y[v] = RationalPolynomial(std::move(yc));
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<Rational> rc;
      for (int j = 0; j <= degree && static_cast<std::size_t>(j) < field.xi_coeffs.size(); ++j)
        rc.emplace_back(field.xi_coeffs[static_cast<std::size_t>(j)](idx(i), idx(k)));
      r[v][k] = RationalPolynomial(std::move(rc));
    }
  }
  for (NodeId v = tree.num_internal(); v-- > 0;) {
    const Node& n = tree.node(v);
    for (std::size_t c = 0; c < n.num_children; ++c) {
      const NodeId child = n.first_child + c;
      const Rational w = prob[child] / prob[v];
      y[v] += y[child] * w;
      for (std::size_t k = 0; k < d; ++k) r[v][k] += r[child][k] * w;
    }
  }

  std::vector<RationalPolyMatrix> tau(tree.num_internal());
  for (NodeId v = 0; v < tree.num_internal(); ++v) {
    const Node& n = tree.node(v);
    RationalPolyMatrix t(n.num_children, d);
    for (std::size_t c = 0; c < n.num_children; ++c) {
      const NodeId child = n.first_child + c;
      const RationalPolynomial dy = y[child] - y[v];
      for (std::size_t k = 0; k < d; ++k) t(c, k) = y[v] * (r[child][k] - r[v][k]) - dy * r[v][k];
    }
    tau[v] = std::move(t);
  }
  return tau;
}

ExactLocus exact_exception_locus(const AnalyticField& field) {
  const auto tau = increment_polynomials(field);
  ExactLocus locus;
  std::vector<ExceptionRoot> raw;
  for (NodeId v = 0; v < tau.size(); ++v) {
    const int required = static_cast<int>(field.tree.node(v).num_children) - 1;
    const RankDrop drop = rank_drop_polynomial(tau[v]);
    if (drop.generic_rank < required) {
      locus.total_failure = true;
      locus.total_failure_nodes.push_back(v);
      continue;
    }
    for (const RealRoot& root : drop.roots) {
      if (root.value < field.domain_lo || root.value > field.domain_hi) continue;
      raw.push_back({root.value, root.multiplicity, {v}});
    }
  }
  std::sort(raw.begin(), raw.end(),
            [](const ExceptionRoot& a, const ExceptionRoot& b) { return a.x < b.x; });
  for (auto& r : raw) {
    if (!locus.roots.empty() && std::abs(r.x - locus.roots.back().x) <= 1e-8) {
      auto& last = locus.roots.back();
      last.multiplicity = std::max(last.multiplicity, r.multiplicity);
      last.nodes.insert(last.nodes.end(), r.nodes.begin(), r.nodes.end());
      continue;
    }
    locus.roots.push_back(std::move(r));
  }
  return locus;
}

AnalyticField example1_instance(const std::vector<double>& x_points, int depth) {
  if (depth < 1) throw std::invalid_argument("example1_instance: depth must be at least 1");
  if (x_points.size() < static_cast<std::size_t>(depth))
    throw DimensionMismatch("example1_instance: need one exception point per step");
  std::vector<int> branching(static_cast<std::size_t>(depth), 2);
  FilteredTree tree = build_tree(branching);
  LeafMeasure p = LeafMeasure::uniform(tree);
  const auto leaves = idx(tree.num_leaves());
  Matrix psi0 = Matrix::Zero(leaves, 1);
  Matrix psi1 = Matrix::Zero(leaves, 1);
  for (Eigen::Index i = 0; i < leaves; ++i) {
    for (int n = 1; n <= depth; ++n) {
      const bool second_child = (i >> (depth - n)) & 1;
      const double eps = second_child ? -1.0 : 1.0;
      const double xn = x_points[static_cast<std::size_t>(n - 1)];
      const double c = 1.0 / (std::ldexp(1.0, n) * (1.0 + std::abs(xn)));
      psi0(i, 0) -= xn * c * eps;
      psi1(i, 0) += c * eps;
    }
  }
  const auto [mn, mx] = std::minmax_element(x_points.begin(), x_points.begin() + depth);
  return polynomial_field(std::move(tree), std::move(p), Matrix::Ones(leaves, 1), {psi0, psi1},
                          *mn - 1.0, *mx + 1.0, *mx + 0.5);
}

double example1_integrand(const FilteredTree& tree, const AdaptedProcess& n,
                          const std::vector<double>& x_points, double x, NodeId v) {
  const int k = tree.node(v).depth + 1;
  const double xk = x_points[static_cast<std::size_t>(k - 1)];
  const double h = n.values(idx(tree.node(v).first_child), 0) - n.values(idx(v), 0);
  return h * std::ldexp(1.0, k) * (1.0 + std::abs(xk)) / (x - xk);
}

}  // namespace mrplab
