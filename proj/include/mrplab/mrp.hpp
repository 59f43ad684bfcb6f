#pragma once

// Deciding the martingale representation property on a finite tree.
//
// Three independent routes:
//   direct  - at every node the increments of S span the martingale-difference
//             space, i.e. rank dS_v = k_v - 1;
//   rank    - rank(kappa_v sigma_v) = rank(kappa_v) on mu-charged nodes, for
//             S = S_0 + sigma . X against a reference X that has the MRP;
//   jacod   - the equivalent martingale measure for S is unique, i.e. the
//             linear system of martingale constraints on the leaf weights has
//             a trivial null space.

#include <optional>
#include <string>
#include <vector>

#include "mrplab/calculus.hpp"

namespace mrplab {

enum class MrpMethod { Direct, Rank, Jacod };
const char* to_string(MrpMethod m);

class ReferenceLacksMrp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FailingNode {
  NodeId node = 0;
  int rank_found = 0;
  int rank_required = 0;
};

struct MrpVerdict {
  bool has_mrp = false;
  std::vector<FailingNode> failing_nodes;
  MrpMethod method = MrpMethod::Direct;
  double tolerance = kRankTolerance;
  // Some singular value (or pivot) sat within a decade of the threshold.
  bool marginal = false;
  // Smallest singular value that decided a required rank, relative to the
  // threshold's reference scale. +inf when nothing was required.
  double min_singular_value = 0.0;
  // Jacod route only.
  int null_space_dim = 0;
};

struct MrpOptions {
  double rank_tol = kRankTolerance;
};

MrpVerdict check_mrp_direct(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& s,
                            const MrpOptions& options = {});

MrpVerdict check_mrp_rank(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                          const PredictableProcess& sigma, const MrpOptions& options = {});

MrpVerdict check_mrp_jacod(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& s,
                           const MrpOptions& options = {});

// Per node, columns that are Q-orthonormal in the martingale-difference
// space, zero-padded to the largest branching minus one. Has the MRP by
// construction.
AdaptedProcess basis_martingale(const FilteredTree& tree, const LeafMeasure& q);

struct Representation {
  PredictableProcess integrand;  // d x d_M per node
  std::vector<double> residual;  // per node, leaves 0
  bool success = false;
  std::optional<NodeId> witness_node;  // first node whose residual failed
};

struct SolveOptions {
  double rank_tol = kRankTolerance;
  double residual_tol = 1e-9;
};

// Per-node minimal-norm least squares dM_v = dS_v gamma_v.
Representation solve_representation(const FilteredTree& tree, const LeafMeasure& q,
                                    const AdaptedProcess& s, const AdaptedProcess& m,
                                    const SolveOptions& options = {});

// (gamma . X == 0) and asserts it agrees with kappa_v gamma_v = 0 on charged
// nodes; disagreement throws InternalConsistencyError.
bool verify_null_integral(const FilteredTree& tree, const PredictableProcess& gamma,
                          const AdaptedProcess& x, const SpectralData& spectral,
                          double tol = 1e-10);

// A Q-martingale with no representation against S, built from a null-space
// direction of the Jacod system. Empty when S has the MRP.
std::optional<AdaptedProcess> nonrepresentable_martingale(const FilteredTree& tree,
                                                          const LeafMeasure& q,
                                                          const AdaptedProcess& s,
                                                          const MrpOptions& options = {});

// Null-space directions of the Jacod system (columns), each summing to zero.
Matrix jacod_null_space(const FilteredTree& tree, const AdaptedProcess& s,
                        const MrpOptions& options = {});

struct InvarianceReport {
  bool verdict_under_p = false;
  bool verdict_under_q = false;
  bool verdicts_equal = false;
  bool same_integrand = true;  // vacuous when X lacks the MRP
  bool ok() const { return verdicts_equal && same_integrand; }
};

// Compares the MRP of X under P with that of its Girsanov transform under Q,
// and for each test martingale M checks that the integrand H representing M
// against X also represents M + [M, L~] against X~.
InvarianceReport mrp_invariance_report(const FilteredTree& tree, const LeafMeasure& p,
                                       const AdaptedProcess& x, const LeafMeasure& q,
                                       const std::vector<AdaptedProcess>& test_martingales = {},
                                       const MrpOptions& options = {});

bool mrp_invariance_check(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                          const LeafMeasure& q, const MrpOptions& options = {});

enum class Decision { Pass, Fail, Marginal, Disagree };
const char* to_string(Decision d);

struct TripleVerdict {
  MrpVerdict direct;
  MrpVerdict rank;
  MrpVerdict jacod;
  Decision decision = Decision::Fail;
};

// Runs all three routes on (Q, S). The rank route uses the basis martingale
// under Q as the reference and sigma from solve_representation.
TripleVerdict check_mrp_all(const FilteredTree& tree, const LeafMeasure& q,
                            const AdaptedProcess& s, const MrpOptions& options = {});

}  // namespace mrplab
