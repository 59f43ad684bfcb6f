#pragma once

// Parametric families x -> (zeta(x), xi(x)) of leaf random variables and the
// measures Q(x), martingales S(x) they induce:
//
//   dQ(x)/dP = zeta(x) / E^P[zeta(x)],   S_t(x) = E^{Q(x)}[xi(x) / zeta(x) | F_t].
//
// Two kinds are supported: polynomial fields in a scalar parameter, and the
// exponential perturbation family
//
//   zeta(x) = (1 - exp(-x zeta)) / x + x / (1 + x),   xi(x) = zeta(x) psi,
//
// which interpolates between a reference measure R (x -> 0, zeta = dR/dP)
// and P itself (x -> infinity).

#include <optional>
#include <vector>

#include "mrplab/mrp.hpp"
#include "mrplab/poly.hpp"

namespace mrplab {

enum class FieldKind { Polynomial, Exponential };

class PositivityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AnalyticField {
  FieldKind kind = FieldKind::Polynomial;
  FilteredTree tree;
  LeafMeasure p;

  // Polynomial kind: zeta(x) = sum_j zeta_coeffs.col(j) x^j (leaves x degree+1),
  // xi(x) = sum_j xi_coeffs[j] x^j (each leaves x d).
  Matrix zeta_coeffs;
  std::vector<Matrix> xi_coeffs;

  // Exponential kind: base density zeta = dR/dP and terminal value psi.
  Vector base_density;
  Matrix psi;

  double domain_lo = 0.0;
  double domain_hi = 1.0;
  double base_point = 0.0;

  std::size_t dim() const;
  int degree() const;  // polynomial kind only
};

AnalyticField polynomial_field(FilteredTree tree, LeafMeasure p, Matrix zeta_coeffs,
                               std::vector<Matrix> xi_coeffs, double lo, double hi,
                               double base_point);

// Leafwise zeta(x) and xi(x).
Vector field_zeta(const AnalyticField& field, double x);
Matrix field_xi(const AnalyticField& field, double x);

struct FieldPoint {
  double x = 0.0;
  LeafMeasure q;
  AdaptedProcess s;
};

// Throws PositivityError when zeta(x) <= 0 at some leaf.
FieldPoint field_evaluate(const AnalyticField& field, double x);

// Requires S^R = E^R[psi | F_t] to have the MRP; U = (0, inf), base point 0.
AnalyticField theorem1_family(const FilteredTree& tree, const LeafMeasure& p,
                              const LeafMeasure& r, const Matrix& psi,
                              const MrpOptions& options = {});

// || dQ(x)/dP - 1 ||_inf.
double density_deviation(const AnalyticField& field, double x);

struct TaylorTerm {
  int n = 0;
  double sup_norm = 0.0;  // || A_n(y) ||_inf
  double bound = 0.0;     // (1/n!) (n / (e y))^n
  bool holds = false;
};

struct TaylorReport {
  double y = 0.0;
  std::vector<TaylorTerm> terms;
  bool bound_holds = true;
  // Sup-norm error of the N-term partial sum of sum_n A_n(y) (x - y)^n
  // against exp(-x zeta), at x = y - 0.9y and x = y + 0.9y.
  std::vector<double> remainder_below;
  std::vector<double> remainder_above;
  // Majorant sum_{n >= N} (1/n!) (n/e)^n 0.9^n of the remainders.
  std::vector<double> remainder_bound;
  int terms_to_tolerance = -1;  // first N with both remainders < 1e-10
};

TaylorReport taylor_check(const Vector& zeta, double y, int n_max);

// Reference-martingale decomposition of a polynomial field against X (a
// P-martingale with the MRP). Per internal node v, with Y = E^P[zeta(x)|F],
// R = E^P[xi(x)|F], Y dY = Y_- alpha . X and dR = Y_- beta . X:
//   alpha_hat_v(x) = Y_v(x) alpha_v(x)          (m x 1 polynomial)
//   beta_hat_v(x)  = Y_v(x) beta_v(x)           (m x d polynomial)
//   numerator_v(x) = Y_v(x) beta_hat_v(x) - alpha_hat_v(x) R_v(x)^T
//   sigma_v(x)     = numerator_v(x) / Y_v(x)^2 = beta_v(x) - alpha_v(x) S_v(x)^T
struct SigmaField {
  std::vector<RealPolynomial> y;        // per node
  std::vector<RealPolyMatrix> r;        // per node, 1 x d
  std::vector<RealPolyMatrix> alpha_hat;
  std::vector<RealPolyMatrix> beta_hat;
  std::vector<RealPolyMatrix> numerator;
  double max_spot_check_error = 0.0;  // identity residual at sampled x

  Matrix sigma(NodeId v, double x) const;
};

SigmaField sigma_field(const AnalyticField& field, const AdaptedProcess& x_ref,
                       int spot_checks = 5, unsigned seed = 7);

struct ExceptionRoot {
  double x = 0.0;
  int multiplicity = 0;
  std::vector<NodeId> nodes;
};

// Exact exception set of a polynomial field on [domain_lo, domain_hi].
struct ExactLocus {
  bool total_failure = false;  // I = U: some node fails for every x
  std::vector<NodeId> total_failure_nodes;
  std::vector<ExceptionRoot> roots;
};

// Per node, the increment matrix of S(x) scaled rowwise by Y_c(x) Y_v(x),
//   tau_v(x) = Y_v(x) dR_v(x) - dY_v(x) R_v(x)^T,
// in exact rational arithmetic; the node fails at x iff rank tau_v(x) < k_v - 1.
std::vector<RationalPolyMatrix> increment_polynomials(const AnalyticField& field);

ExactLocus exact_exception_locus(const AnalyticField& field);

struct GridRow {
  double x = 0.0;
  Decision verdict = Decision::Fail;
  std::size_t failing_node_count = 0;
  double min_singular_value = 0.0;
  double density_deviation = 0.0;
};

enum class Oracles { Direct, Triple };

struct ScanOptions {
  std::vector<double> grid;  // explicit points; overrides the generated grid
  std::size_t points = 512;
  double lo = 0.0;
  double hi = 0.0;  // hi <= lo means: use the field's domain
  bool log_spaced = false;
  bool include_exact = true;  // insert exact roots into the grid (polynomial kind)
  Oracles oracles = Oracles::Triple;
  MrpOptions mrp;
};

struct ExceptionReport {
  std::vector<GridRow> rows;  // sorted by x
  std::optional<ExactLocus> exact;
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t marginal = 0;
  std::size_t disagree = 0;
  bool everywhere = false;  // I = U
};

GridRow evaluate_point(const AnalyticField& field, double x, const ScanOptions& options);

// Grid generation shared by the serial and parallel scanners.
std::vector<double> make_grid(const AnalyticField& field, const ScanOptions& options,
                              const std::optional<ExactLocus>& exact);

ExceptionReport scan_exception_set(const AnalyticField& field, const ScanOptions& options = {});

// Reference scanner, one point at a time; kept for testing the parallel path.
ExceptionReport scan_exception_set_serial(const AnalyticField& field,
                                          const ScanOptions& options = {});

// Depth-N binary tree, uniform P, zeta = 1, and
//   xi(x) = sum_n (x - x_n) / (2^n (1 + |x_n|)) eps_n,
// where eps_n = +1 on the first child and -1 on the second at step n.
AnalyticField example1_instance(const std::vector<double>& x_points, int depth);

// Closed-form integrand of N against S(x) = E[xi(x) | F_n] at a depth-(k-1)
// node: h_k 2^k (1 + |x_k|) / (x - x_k), where h_k is N's step on eps_k = +1.
double example1_integrand(const FilteredTree& tree, const AdaptedProcess& n,
                          const std::vector<double>& x_points, double x, NodeId v);

}  // namespace mrplab
