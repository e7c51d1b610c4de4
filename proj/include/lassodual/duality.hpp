#pragma once

#include "lassodual/lasso.hpp"

namespace lassodual {

struct DualVector {
  CxVec u;
  double mu = 0.0;
};

/// Primal active set M and dual active set U with the thresholds used.
struct ActiveSets {
  IndexSet primal;  // M
  IndexSet dual;    // U, superset of M for converged solutions
  double epsilon = 1e-3;
  double epsilon_mu = 1e-2;
};

constexpr double kDefaultEpsilon = 1e-3;
constexpr double kDefaultEpsilonMu = 1e-2;

struct KktTolerances {
  double box = 1e-6;                 // relative to mu
  double tightness = 1e-4;           // relative to mu
  double phase_rad = 1e-4;
  double row_space = 1e-6;           // relative to ||D^H u||
};

struct KktReport {
  double max_box_violation = 0.0;
  double min_tightness_gap = 0.0;
  double max_phase_mismatch_rad = 0.0;
  double row_space_residual = 0.0;
  bool pass = false;
};

/// Split of x per the three-term decomposition: least-norm + nullspace - dual.
struct Decomposition {
  CxVec least_norm_part;  // A+ y
  CxVec nullspace_part;
  CxVec dual_part;        // (1/2) (A^H A)+ D^H u
};

/// u = 2 D^{-H} A^H (y - A x): the weighted matched filter on the residuals.
DualVector dual_from_primal(const SteeringDictionary& dict, const WeightMatrix& weights,
                            const CxVec& y, const CxVec& x, double mu);

/// Indices with |x_m| > epsilon * ||x||_inf.
IndexSet primal_active_set(const CxVec& x, double epsilon = kDefaultEpsilon);

/// Indices with 1 - |u_m|/mu < epsilon_mu.
IndexSet dual_active_set(const CxVec& u, double mu, double epsilon_mu = kDefaultEpsilonMu);

ActiveSets active_sets(const CxVec& x, const CxVec& u, double mu,
                       double epsilon = kDefaultEpsilon,
                       double epsilon_mu = kDefaultEpsilonMu);

/// Certifies box feasibility, tightness and phase alignment on the active set,
/// and the row-space constraint of the dual problem.
KktReport check_kkt(const SteeringDictionary& dict, const WeightMatrix& weights,
                    const CxVec& y, const CxVec& x, double mu,
                    const KktTolerances& tol = {});

/// Least-squares regression of the selected columns onto y (left pseudoinverse).
CxVec restrict_l0(const SteeringDictionary& dict, const IndexSet& set, const CxVec& y);

/// Predicted difference x_l0 - x_l1 on the active set:
/// Delta = (mu/2) (A_M^H A_M)^{-1} D_M^H e^{j theta_M}.
CxVec l0_l1_gap(const SteeringDictionary& dict, const WeightMatrix& weights,
                const IndexSet& set, double mu, const std::vector<double>& phases);

/// Three-term split of a converged primal solution (requires full row rank).
Decomposition least_norm_decomposition(const SteeringDictionary& dict, const CxVec& y,
                                       const CxVec& x, const CxVec& u,
                                       const WeightMatrix& weights);

}  // namespace lassodual
