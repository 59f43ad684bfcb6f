#pragma once

// Discrete stochastic calculus on a FilteredTree: martingales, stochastic
// integrals, quadratic covariation, the kappa/A/mu decomposition of the
// predictable quadratic variation, minimal integrands and the Girsanov
// transform.

#include <vector>

#include "mrplab/linalg.hpp"
#include "mrplab/probspace.hpp"

namespace mrplab {

inline constexpr double kMartingaleTolerance = 1e-10;
inline constexpr double kRankTolerance = 1e-9;

// Largest violation of E^Q[X_child | parent] = X_parent over internal nodes,
// divided by max(1, max |X|).
double martingale_defect(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x);
bool is_martingale(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x,
                   double tol = kMartingaleTolerance);
void require_martingale(const FilteredTree& tree, const LeafMeasure& q, const AdaptedProcess& x,
                        const char* what);

// S_t = E^Q[psi | F_t], with the martingale property re-checked.
AdaptedProcess martingale_from_terminal(const FilteredTree& tree, const LeafMeasure& q,
                                        const Matrix& psi);

// Z_t = E^P[dQ/dP | F_t].
AdaptedProcess density_process(const FilteredTree& tree, const LeafMeasure& p,
                               const LeafMeasure& q);

// Increment matrix of X at internal node v: one row per child, X_c - X_v.
Matrix increments(const FilteredTree& tree, const AdaptedProcess& x, NodeId v);

// (gamma . X): starts at 0, increments gamma_v^T (X_c - X_v).
AdaptedProcess stochastic_integral(const FilteredTree& tree, const PredictableProcess& gamma,
                                   const AdaptedProcess& x);

// [X, Y]_t = sum_{s <= t} dX_s dY_s^T, starting from 0.
MatrixProcess quadratic_covariation(const FilteredTree& tree, const AdaptedProcess& x,
                                    const AdaptedProcess& y);

// Per internal node v:
//   c[v]     = sum_children w_c dX_c dX_c^T   (increment of <X>)
//   a[v]     = trace c[v]                       (increment of A^X)
//   kappa[v] = sqrt(c[v] / a[v]), or 0 when a[v] = 0
//   mu[v]    = P(v) a[v]
struct SpectralData {
  std::vector<Matrix> c;
  std::vector<Matrix> kappa;
  Vector a;
  Vector mu;

  // Nodes carrying mu-mass; the only nodes an a.s. statement constrains.
  bool charged(NodeId v) const { return mu[static_cast<Eigen::Index>(v)] > 0.0; }
};

SpectralData spectral_decomposition(const FilteredTree& tree, const LeafMeasure& p,
                                    const AdaptedProcess& x);

// beta_v = kappa_v^+ kappa_v gamma_v.
PredictableProcess minimal_integrand(const FilteredTree& tree, const PredictableProcess& gamma,
                                     const SpectralData& spectral, double rtol = kRankTolerance);

struct GirsanovResult {
  AdaptedProcess transformed;  // X~ = X + [X, L~], a Q-martingale
  AdaptedProcess z;            // density process of Q w.r.t. P
  AdaptedProcess z_inverse;    // 1 / Z, density process of P w.r.t. Q
  AdaptedProcess l;            // L  = Z~_- . Z
  AdaptedProcess l_tilde;      // L~ = Z_- . Z~
};

GirsanovResult girsanov(const FilteredTree& tree, const LeafMeasure& p, const AdaptedProcess& x,
                        const LeafMeasure& q);

AdaptedProcess girsanov_transform(const FilteredTree& tree, const LeafMeasure& p,
                                  const AdaptedProcess& x, const LeafMeasure& q);

// Y + [Y, L] for a vector process Y and a scalar process L.
AdaptedProcess add_covariation(const FilteredTree& tree, const AdaptedProcess& y,
                               const AdaptedProcess& l);

}  // namespace mrplab
