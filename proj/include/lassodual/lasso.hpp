#pragma once

#include <optional>

#include "lassodual/array_model.hpp"
#include "lassodual/types.hpp"

namespace lassodual {

/// Diagonal penalty weighting with strictly positive real entries.
class WeightMatrix {
 public:
  static WeightMatrix identity(int size);
  explicit WeightMatrix(RealVec diag);

  int size() const { return static_cast<int>(diag_.size()); }
  const RealVec& diag() const { return diag_; }
  double entry(int m) const { return diag_(m); }

 private:
  RealVec diag_;
};

struct LassoProblem {
  const SteeringDictionary* dict = nullptr;
  WeightMatrix weights;
  CxVec y;
  double mu = 0.0;

  void validate() const;
};

struct SolverOptions {
  int max_iterations = 20000;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double splitting_penalty = 1.0;  // initial ADMM penalty, rebalanced adaptively
  bool polish = true;              // refine the support via the restricted KKT system
};

struct PrimalSolution {
  CxVec x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// v |-> v * max(0, 1 - tau/|v|): magnitude shrinkage with the phase kept.
cxd complex_soft_threshold(cxd v, double tau);

double lasso_objective(const LassoProblem& p, const CxVec& x);

/// ADMM on the split z = Dx with complex soft-threshold prox. Off-support
/// coordinates of the returned x are exactly zero.
PrimalSolution solve(const LassoProblem& p, const SolverOptions& opts = {},
                     const std::optional<CxVec>& warm_start = std::nullopt);

/// Independently coded proximal-gradient (ISTA) reference. Slow; test use only.
PrimalSolution oracle_solve(const LassoProblem& p, int iterations);

}  // namespace lassodual
