#pragma once

#include "lassodual/duality.hpp"

namespace lassodual {

struct Peak {
  int index = 0;
  double magnitude = 0.0;
};

/// Local peaks sorted by magnitude descending, ties broken by lower index.
/// Boundary elements count when strictly greater than their single neighbor;
/// a vector with no strict peak at all reports its lowest-index maximum.
std::vector<Peak> find_peaks(const RealVec& magnitudes);

struct PeakValue {
  double magnitude = 0.0;
  bool fewer_peaks = false;  // set when fewer than i peaks exist
};

/// Magnitude of the i-th largest local peak of |u| (1-based).
PeakValue peak(const DualVector& u, int i, bool sort_mode = false);

/// Zero-solution threshold 2 ||D^{-H} A^H y||_inf.
double mu_max(const SteeringDictionary& dict, const WeightMatrix& weights,
              const CxVec& y);

/// mu = (1-F) peak_hi + F peak_lo, F in (0,1).
double interval_mu(double peak_hi, double peak_lo, double f);

struct PathSample {
  double mu = 0.0;
  CxVec x;
  CxVec u;
  ActiveSets sets;
  double objective = 0.0;
  bool converged = true;
};

struct SolutionPath {
  std::vector<PathSample> samples;       // mu strictly decreasing
  std::vector<double> candidate_points;  // sample mu values where |M| changed
};

/// Solves one LASSO per mu value (strictly decreasing), warm-started.
SolutionPath sweep_path(const SteeringDictionary& dict, const WeightMatrix& weights,
                        const CxVec& y, const std::vector<double>& mu_values,
                        const SolverOptions& opts = {});

enum class SelectAlgorithm { kOrderRecursive, kFast, kDual };

struct SelectorOptions {
  double f = 0.9;
  double epsilon = kDefaultEpsilon;
  double epsilon_mu = kDefaultEpsilonMu;
  int max_outer_iterations = 64;
  int max_bisection_steps = 32;
  double bisection_rel_tol = 1e-6;
  bool peak_sort_mode = false;  // degenerate sorting fallback of the peak function
  SolverOptions solver;
};

struct SelectionTraceEntry {
  int iteration = 0;
  double mu = 0.0;
  int primal_count = 0;
  int dual_count = 0;
  bool bisection = false;
  bool rank_fallback = false;  // dual algorithm truncated U to regain full rank
};

class K0Unreachable : public std::runtime_error {
 public:
  K0Unreachable(const std::string& msg, int nearest_below, int nearest_above)
      : std::runtime_error(msg),
        nearest_below(nearest_below),
        nearest_above(nearest_above) {}
  int nearest_below;  // closest achieved |M| below/above the target, -1 if none
  int nearest_above;
};

struct SelectionResult {
  double mu = 0.0;
  CxVec x;
  CxVec u;
  ActiveSets sets;
  CxVec x_l0;  // restricted least-squares amplitudes over sets.primal
  int outer_iterations = 0;
  int lasso_solve_count = 0;
  std::vector<SelectionTraceEntry> trace;
};

/// Table-driven mu selection walking the path one peak at a time.
SelectionResult select_mu_order_recursive(const SteeringDictionary& dict,
                                          const WeightMatrix& weights, const CxVec& y,
                                          int k0, const SelectorOptions& opts = {});

/// Jumps directly to the K0-th / (K0+1)-th peak interval each iteration.
SelectionResult select_mu_fast(const SteeringDictionary& dict,
                               const WeightMatrix& weights, const CxVec& y, int k0,
                               const SelectorOptions& opts = {});

/// Works from the dual vector only: regression on U, thresholding for M.
SelectionResult select_mu_dual(const SteeringDictionary& dict,
                               const WeightMatrix& weights, const CxVec& y, int k0,
                               const SelectorOptions& opts = {});

struct ClusterEnergy {
  int lo = 0;  // inclusive bin range of the cluster
  int hi = 0;
  double energy = 0.0;  // ||A_cluster x_cluster||^2
};

/// Coherent per-cluster energy: active bins within +-radius of each other are
/// grouped and the partial field energy of each group is summed.
std::vector<ClusterEnergy> energy_aggregate(const PathSample& sample,
                                            const SteeringDictionary& dict,
                                            const IndexSet& set, int radius);

}  // namespace lassodual
