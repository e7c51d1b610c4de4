#include "lassodual/duality.hpp"

#include <cmath>

namespace lassodual {

namespace {

constexpr double kRankTol = 1e-10;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

CxMat select_columns(const SteeringDictionary& dict, const IndexSet& set) {
  CxMat sub(dict.sensors(), set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    const int m = set[j];
    if (m < 0 || m >= dict.size()) throw InvalidInput("active-set index out of range");
    sub.col(static_cast<int>(j)) = dict.entries().col(m);
  }
  return sub;
}

void require_full_column_rank(const Eigen::ColPivHouseholderQR<CxMat>& qr,
                              const IndexSet& set, const char* what) {
  if (qr.rank() < static_cast<Eigen::Index>(set.size())) {
    std::string msg = std::string(what) + ": rank-deficient restricted basis {";
    for (std::size_t j = 0; j < set.size(); ++j)
      msg += (j ? "," : "") + std::to_string(set[j]);
    msg += "}";
    throw RankDeficient(msg);
  }
}

}  // namespace

DualVector dual_from_primal(const SteeringDictionary& dict, const WeightMatrix& weights,
                            const CxVec& y, const CxVec& x, double mu) {
  if (weights.size() != dict.size())
    throw InvalidInput("dual_from_primal: weight size mismatch");
  const CxVec residual = y - dict.entries() * x;
  CxVec u = 2.0 * (dict.entries().adjoint() * residual);
  for (int m = 0; m < u.size(); ++m) u(m) /= weights.entry(m);
  return DualVector{std::move(u), mu};
}

IndexSet primal_active_set(const CxVec& x, double epsilon) {
  IndexSet set;
  if (x.size() == 0) return set;
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak == 0.0) return set;
  const double threshold = epsilon * peak;
  for (int m = 0; m < x.size(); ++m)
    if (std::abs(x(m)) > threshold) set.push_back(m);
  return set;
}

IndexSet dual_active_set(const CxVec& u, double mu, double epsilon_mu) {
  if (!(mu > 0.0)) throw InvalidInput("dual_active_set: mu must be > 0");
  IndexSet set;
  for (int m = 0; m < u.size(); ++m)
    if (1.0 - std::abs(u(m)) / mu < epsilon_mu) set.push_back(m);
  return set;
}

ActiveSets active_sets(const CxVec& x, const CxVec& u, double mu, double epsilon,
                       double epsilon_mu) {
  ActiveSets sets;
  sets.epsilon = epsilon;
  sets.epsilon_mu = epsilon_mu;
  sets.primal = primal_active_set(x, epsilon);
  sets.dual = dual_active_set(u, mu, epsilon_mu);
  return sets;
}

KktReport check_kkt(const SteeringDictionary& dict, const WeightMatrix& weights,
                    const CxVec& y, const CxVec& x, double mu,
                    const KktTolerances& tol) {
  const DualVector dual = dual_from_primal(dict, weights, y, x, mu);
  const CxVec& u = dual.u;
  KktReport report;

  report.max_box_violation = std::max(0.0, u.cwiseAbs().maxCoeff() - mu);

  const IndexSet active = primal_active_set(x);
  report.min_tightness_gap = 0.0;
  report.max_phase_mismatch_rad = 0.0;
  for (int m : active) {
    report.min_tightness_gap =
        std::max(report.min_tightness_gap, std::abs(mu - std::abs(u(m))));
    if (std::abs(x(m)) < 1e-12 || std::abs(u(m)) < 1e-12) continue;
    const double mismatch =
        std::abs(wrap_angle(std::arg(u(m)) - std::arg(x(m))));
    report.max_phase_mismatch_rad = std::max(report.max_phase_mismatch_rad, mismatch);
  }

  // Row-space constraint via the projector onto span(A^H):
  // ||(I - P) D^H u|| with P = A^H (A A^H)^+ A.
  CxVec dhu(u.size());
  for (int m = 0; m < u.size(); ++m) dhu(m) = weights.entry(m) * u(m);
  Eigen::ColPivHouseholderQR<CxMat> qr(dict.entries().adjoint());
  qr.setThreshold(kRankTol);
  const CxVec coeffs = qr.solve(dhu);
  const CxVec projected = dict.entries().adjoint() * coeffs;
  report.row_space_residual = (dhu - projected).norm();

  const double dhu_norm = dhu.norm();
  report.pass = report.max_box_violation <= tol.box * mu &&
                report.min_tightness_gap <= tol.tightness * mu &&
                report.max_phase_mismatch_rad <= tol.phase_rad &&
                report.row_space_residual <= tol.row_space * std::max(dhu_norm, 1e-300);
  return report;
}

CxVec restrict_l0(const SteeringDictionary& dict, const IndexSet& set, const CxVec& y) {
  if (set.empty()) return CxVec();
  if (static_cast<int>(set.size()) > dict.sensors())
    throw RankDeficient("restrict_l0: more active columns than sensors");
  const CxMat sub = select_columns(dict, set);
  Eigen::ColPivHouseholderQR<CxMat> qr(sub);
  qr.setThreshold(kRankTol);
  require_full_column_rank(qr, set, "restrict_l0");
  return qr.solve(y);
}

CxVec l0_l1_gap(const SteeringDictionary& dict, const WeightMatrix& weights,
                const IndexSet& set, double mu, const std::vector<double>& phases) {
  if (phases.size() != set.size())
    throw InvalidInput("l0_l1_gap: one phase per active index required");
  if (set.empty()) return CxVec();
  const CxMat sub = select_columns(dict, set);
  const CxMat gram = sub.adjoint() * sub;
  Eigen::ColPivHouseholderQR<CxMat> qr(gram);
  qr.setThreshold(kRankTol);
  require_full_column_rank(qr, set, "l0_l1_gap");
  CxVec rhs(set.size());
  for (std::size_t j = 0; j < set.size(); ++j)
    rhs(static_cast<int>(j)) =
        weights.entry(set[j]) * std::exp(cxd(0.0, phases[j]));
  return 0.5 * mu * qr.solve(rhs);
}

Decomposition least_norm_decomposition(const SteeringDictionary& dict, const CxVec& y,
                                       const CxVec& x, const CxVec& u,
                                       const WeightMatrix& weights) {
  const CxMat& a = dict.entries();
  Eigen::ColPivHouseholderQR<CxMat> qr(a);
  qr.setThreshold(kRankTol);
  if (qr.rank() < a.rows())
    throw RankDeficient("least_norm_decomposition: A is not full row rank");

  // A+ y for a full-row-rank A: A^H (A A^H)^{-1} y.
  const CxMat aah = a * a.adjoint();
  Eigen::LLT<CxMat> llt(aah);
  Decomposition dec;
  dec.least_norm_part = a.adjoint() * llt.solve(y);

  // (A^H A)+ D^H u = A+ (A+)^H D^H u for full row rank.
  CxVec dhu(u.size());
  for (int m = 0; m < u.size(); ++m) dhu(m) = weights.entry(m) * u(m);
  dec.dual_part = 0.5 * (a.adjoint() * llt.solve(llt.solve(a * dhu)));

  dec.nullspace_part = x - dec.least_norm_part + dec.dual_part;
  return dec;
}

}  // namespace lassodual
