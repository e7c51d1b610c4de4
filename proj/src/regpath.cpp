#include "lassodual/regpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lassodual {

std::vector<Peak> find_peaks(const RealVec& magnitudes) {
  const int m = static_cast<int>(magnitudes.size());
  if (m < 2) throw InvalidInput("find_peaks needs at least 2 elements");
  std::vector<Peak> peaks;
  if (magnitudes(0) > magnitudes(1)) peaks.push_back({0, magnitudes(0)});
  for (int i = 1; i + 1 < m; ++i)
    if (magnitudes(i) > magnitudes(i - 1) && magnitudes(i) > magnitudes(i + 1))
      peaks.push_back({i, magnitudes(i)});
  if (magnitudes(m - 1) > magnitudes(m - 2)) peaks.push_back({m - 1, magnitudes(m - 1)});

  if (peaks.empty()) {
    // No strict peak anywhere (e.g. a flat vector): fall back to the
    // lowest-index global maximum.
    int best = 0;
    for (int i = 1; i < m; ++i)
      if (magnitudes(i) > magnitudes(best)) best = i;
    peaks.push_back({best, magnitudes(best)});
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return a.index < b.index;
  });
  return peaks;
}

PeakValue peak(const DualVector& u, int i, bool sort_mode) {
  if (i < 1) throw InvalidInput("peak index must be >= 1");
  const RealVec mags = u.u.cwiseAbs();
  if (sort_mode) {
    std::vector<double> sorted(mags.data(), mags.data() + mags.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (i > static_cast<int>(sorted.size())) return {0.0, true};
    return {sorted[i - 1], false};
  }
  const std::vector<Peak> peaks = find_peaks(mags);
  if (i > static_cast<int>(peaks.size())) return {0.0, true};
  return {peaks[i - 1].magnitude, false};
}

double mu_max(const SteeringDictionary& dict, const WeightMatrix& weights,
              const CxVec& y) {
  const CxVec corr = dict.entries().adjoint() * y;
  double best = 0.0;
  for (int m = 0; m < corr.size(); ++m)
    best = std::max(best, std::abs(corr(m)) / weights.entry(m));
  return 2.0 * best;
}

double interval_mu(double peak_hi, double peak_lo, double f) {
  if (!(f > 0.0 && f < 1.0)) throw InvalidInput("interval factor F must be in (0,1)");
  if (peak_hi < peak_lo) throw InvalidInput("interval_mu: peaks out of order");
  if (peak_lo < 0.0) throw InvalidInput("interval_mu: peaks must be >= 0");
  return (1.0 - f) * peak_hi + f * peak_lo;
}

SolutionPath sweep_path(const SteeringDictionary& dict, const WeightMatrix& weights,
                        const CxVec& y, const std::vector<double>& mu_values,
                        const SolverOptions& opts) {
  if (mu_values.empty()) throw InvalidInput("sweep_path: empty mu grid");
  for (std::size_t i = 0; i < mu_values.size(); ++i) {
    if (!(mu_values[i] > 0.0)) throw InvalidInput("sweep_path: mu values must be > 0");
    if (i > 0 && !(mu_values[i] < mu_values[i - 1]))
      throw InvalidInput("sweep_path: mu values must be strictly decreasing");
  }

  SolutionPath path;
  std::optional<CxVec> warm;
  int prev_active = -1;
  for (double mu : mu_values) {
    LassoProblem problem{&dict, weights, y, mu};
    const PrimalSolution sol = solve(problem, opts, warm);
    warm = sol.x;

    PathSample sample;
    sample.mu = mu;
    sample.x = sol.x;
    sample.u = dual_from_primal(dict, weights, y, sol.x, mu).u;
    sample.sets = active_sets(sample.x, sample.u, mu);
    sample.objective = sol.objective;
    sample.converged = sol.converged;

    const int active = static_cast<int>(sample.sets.primal.size());
    if (prev_active >= 0 && active != prev_active)
      path.candidate_points.push_back(mu);
    prev_active = active;
    path.samples.push_back(std::move(sample));
  }
  return path;
}

namespace {

// Regression route of the dual-domain selector: restrict to U, truncating to
// the strongest dual coordinates whenever the restricted basis loses rank.
CxVec regress_on_dual_set(const SteeringDictionary& dict, const CxVec& y,
                          const CxVec& u, IndexSet& set, bool& truncated) {
  truncated = false;
  IndexSet work = set;
  std::sort(work.begin(), work.end(),
            [&](int a, int b) { return std::abs(u(a)) > std::abs(u(b)); });
  if (static_cast<int>(work.size()) > dict.sensors()) {
    work.resize(dict.sensors());
    truncated = true;
  }
  while (!work.empty()) {
    IndexSet attempt = work;
    std::sort(attempt.begin(), attempt.end());
    try {
      const CxVec coeffs = restrict_l0(dict, attempt, y);
      set = attempt;
      return coeffs;
    } catch (const RankDeficient&) {
      work.pop_back();
      truncated = true;
    }
  }
  set.clear();
  return CxVec();
}

SelectionResult run_selector(const SteeringDictionary& dict, const WeightMatrix& weights,
                             const CxVec& y, int k0, const SelectorOptions& opts,
                             SelectAlgorithm algorithm) {
  if (k0 < 1) throw InvalidInput("sparsity order K0 must be >= 1");
  if (!(opts.f > 0.0 && opts.f < 1.0)) throw InvalidInput("F must be in (0,1)");

  const double inf = std::numeric_limits<double>::infinity();
  SelectionResult result;
  CxVec x = CxVec::Zero(dict.size());
  double mu_current = inf;        // no LASSO solved yet: x = 0, u = WMF of y
  double mu_prev_under = inf;     // last mu whose active count was below k0
  int nearest_below = -1, nearest_above = -1;

  auto solve_at = [&](double mu) {
    LassoProblem problem{&dict, weights, y, mu};
    const PrimalSolution sol = solve(problem, opts.solver, x);
    x = sol.x;
    mu_current = mu;
    ++result.lasso_solve_count;
  };

  auto throw_unreachable = [&](const std::string& why) -> void {
    throw K0Unreachable("K0=" + std::to_string(k0) + " unreachable: " + why,
                        nearest_below, nearest_above);
  };

  // Detects M (and the l0 coefficients for the dual algorithm) from the
  // current iterate; also reports U and whether rank truncation happened.
  CxVec x_l0_dual;
  auto detect_sets = [&](const CxVec& u, IndexSet& m_set, IndexSet& u_set,
                         bool& rank_fallback) {
    rank_fallback = false;
    u_set = std::isfinite(mu_current)
                ? dual_active_set(u, mu_current, opts.epsilon_mu)
                : IndexSet{};
    if (algorithm == SelectAlgorithm::kDual) {
      IndexSet relaxed = u_set;
      const CxVec coeffs = regress_on_dual_set(dict, y, u, relaxed, rank_fallback);
      m_set.clear();
      x_l0_dual = CxVec::Zero(dict.size());
      if (coeffs.size() > 0) {
        const double top = coeffs.cwiseAbs().maxCoeff();
        for (std::size_t j = 0; j < relaxed.size(); ++j) {
          x_l0_dual(relaxed[j]) = coeffs(static_cast<int>(j));
          if (std::abs(coeffs(static_cast<int>(j))) > opts.epsilon * top)
            m_set.push_back(relaxed[j]);
        }
        std::sort(m_set.begin(), m_set.end());
      }
    } else {
      m_set = primal_active_set(x, opts.epsilon);
    }
  };

  auto record_nearest = [&](int count) {
    if (count < k0 && count > nearest_below) nearest_below = count;
    if (count > k0 && (nearest_above < 0 || count < nearest_above))
      nearest_above = count;
  };

  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    result.outer_iterations = outer + 1;
    const DualVector dual =
        dual_from_primal(dict, weights, y, x, std::isfinite(mu_current) ? mu_current : 0.0);
    IndexSet m_set, u_set;
    bool rank_fallback = false;
    detect_sets(dual.u, m_set, u_set, rank_fallback);
    const int count = static_cast<int>(m_set.size());
    record_nearest(count);
    result.trace.push_back({outer, std::isfinite(mu_current) ? mu_current : 0.0, count,
                            static_cast<int>(u_set.size()), false, rank_fallback});

    if (count == k0 && std::isfinite(mu_current)) {
      result.mu = mu_current;
      result.x = algorithm == SelectAlgorithm::kDual ? x_l0_dual : x;
      result.u = dual.u;
      result.sets = ActiveSets{m_set, u_set, opts.epsilon, opts.epsilon_mu};
      result.x_l0 = restrict_l0(dict, m_set, y);
      return result;
    }

    if (count < k0) {
      const int first = algorithm == SelectAlgorithm::kOrderRecursive
                            ? static_cast<int>(u_set.size()) + 1
                            : k0;
      const PeakValue hi = peak(dual, first, opts.peak_sort_mode);
      const PeakValue lo = peak(dual, first + 1, opts.peak_sort_mode);
      if (hi.fewer_peaks || lo.fewer_peaks)
        throw_unreachable("fewer than " + std::to_string(first + 1) +
                          " peaks in the dual vector");
      double mu_next = interval_mu(hi.magnitude, lo.magnitude, opts.f);
      if (!(mu_next > 0.0)) throw_unreachable("peak interval collapsed to zero");
      // The peak prediction can only stall, never climb the path again.
      if (std::isfinite(mu_current) && mu_next >= mu_current)
        mu_next = mu_current * (1.0 - opts.bisection_rel_tol);
      mu_prev_under = mu_current;
      solve_at(mu_next);
      continue;
    }

    // count > k0: the chosen mu overshot, bisect back towards mu_prev_under.
    double lo_mu = mu_current;
    double hi_mu = std::isfinite(mu_prev_under) ? mu_prev_under
                                                : 2.0 * mu_max(dict, weights, y);
    for (int step = 0; step < opts.max_bisection_steps; ++step) {
      const double mid = 0.5 * (lo_mu + hi_mu);
      solve_at(mid);
      const DualVector mid_dual = dual_from_primal(dict, weights, y, x, mid);
      IndexSet mid_m, mid_u;
      bool mid_fallback = false;
      detect_sets(mid_dual.u, mid_m, mid_u, mid_fallback);
      const int mid_count = static_cast<int>(mid_m.size());
      record_nearest(mid_count);
      result.trace.push_back({outer, mid, mid_count, static_cast<int>(mid_u.size()),
                              true, mid_fallback});
      if (mid_count == k0) {
        result.outer_iterations = outer + 1;
        result.mu = mid;
        result.x = algorithm == SelectAlgorithm::kDual ? x_l0_dual : x;
        result.u = mid_dual.u;
        result.sets = ActiveSets{mid_m, mid_u, opts.epsilon, opts.epsilon_mu};
        result.x_l0 = restrict_l0(dict, mid_m, y);
        return result;
      }
      if (mid_count < k0)
        hi_mu = mid;  // still too sparse: the target order lies at smaller mu
      else
        lo_mu = mid;
      if ((hi_mu - lo_mu) < opts.bisection_rel_tol * hi_mu) break;
    }
    throw_unreachable("bisection did not reach the requested order");
  }
  throw_unreachable("outer iteration budget exhausted");
  return result;  // unreachable
}

}  // namespace

SelectionResult select_mu_order_recursive(const SteeringDictionary& dict,
                                          const WeightMatrix& weights, const CxVec& y,
                                          int k0, const SelectorOptions& opts) {
  return run_selector(dict, weights, y, k0, opts, SelectAlgorithm::kOrderRecursive);
}

SelectionResult select_mu_fast(const SteeringDictionary& dict,
                               const WeightMatrix& weights, const CxVec& y, int k0,
                               const SelectorOptions& opts) {
  return run_selector(dict, weights, y, k0, opts, SelectAlgorithm::kFast);
}

SelectionResult select_mu_dual(const SteeringDictionary& dict,
                               const WeightMatrix& weights, const CxVec& y, int k0,
                               const SelectorOptions& opts) {
  return run_selector(dict, weights, y, k0, opts, SelectAlgorithm::kDual);
}

std::vector<ClusterEnergy> energy_aggregate(const PathSample& sample,
                                            const SteeringDictionary& dict,
                                            const IndexSet& set, int radius) {
  if (radius < 0) throw InvalidInput("energy_aggregate: radius must be >= 0");
  std::vector<ClusterEnergy> clusters;
  IndexSet sorted = set;
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] - sorted[j] <= radius) ++j;
    ClusterEnergy cluster;
    cluster.lo = sorted[i];
    cluster.hi = sorted[j];
    CxVec field = CxVec::Zero(dict.sensors());
    for (std::size_t k = i; k <= j; ++k)
      field += dict.column(sorted[k]) * sample.x(sorted[k]);
    cluster.energy = field.squaredNorm();
    clusters.push_back(cluster);
    i = j + 1;
  }
  return clusters;
}

}  // namespace lassodual
