#include "lassodual/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lassodual {

AngleGrid::AngleGrid(std::vector<double> angles) : angles_deg_(std::move(angles)) {
  if (angles_deg_.size() < 2) throw InvalidInput("angle grid needs at least 2 angles");
  for (std::size_t i = 0; i + 1 < angles_deg_.size(); ++i) {
    if (!(angles_deg_[i] < angles_deg_[i + 1]))
      throw InvalidInput("angle grid must be strictly increasing");
  }
  if (angles_deg_.front() < -90.0 || angles_deg_.back() > 90.0)
    throw InvalidInput("angle grid must lie within [-90, 90] degrees");
}

AngleGrid AngleGrid::uniform(int count) {
  if (count < 2) throw InvalidInput("uniform grid size must be >= 2");
  std::vector<double> angles(count);
  for (int m = 0; m < count; ++m)
    angles[m] = static_cast<double>(m) * 180.0 / count - 90.0;
  return AngleGrid(std::move(angles));
}

AngleGrid AngleGrid::span(double lo_deg, double hi_deg, double step_deg) {
  if (!(lo_deg < hi_deg)) throw InvalidInput("span grid needs lo < hi");
  if (!(step_deg > 0.0)) throw InvalidInput("span grid needs step > 0");
  const double steps = (hi_deg - lo_deg) / step_deg;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9)
    throw InvalidInput("span grid: (hi-lo)/step is not integral");
  const int count = static_cast<int>(rounded) + 1;
  std::vector<double> angles(count);
  for (int m = 0; m < count; ++m) angles[m] = lo_deg + m * step_deg;
  angles.back() = hi_deg;
  return AngleGrid(std::move(angles));
}

AngleGrid AngleGrid::from_angles(std::vector<double> angles_deg) {
  return AngleGrid(std::move(angles_deg));
}

int AngleGrid::nearest_bin(double angle_deg) const {
  int best = 0;
  double best_dist = std::abs(angles_deg_[0] - angle_deg);
  for (int m = 1; m < size(); ++m) {
    const double d = std::abs(angles_deg_[m] - angle_deg);
    if (d < best_dist) {
      best_dist = d;
      best = m;
    }
  }
  return best;
}

SteeringDictionary::SteeringDictionary(AngleGrid grid, int sensors)
    : grid_(std::move(grid)) {
  if (sensors < 1) throw InvalidInput("dictionary needs at least one sensor");
  const int m_count = grid_.size();
  entries_.resize(sensors, m_count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(sensors));
  for (int m = 0; m < m_count; ++m) {
    const double s = std::sin(deg2rad(grid_.angle_deg(m)));
    for (int n = 0; n < sensors; ++n)
      entries_(n, m) = scale * std::exp(cxd(0.0, n * kPi * s));
  }
}

cxd coherence(const SteeringDictionary& dict, int i, int j) {
  if (i < 0 || j < 0 || i >= dict.size() || j >= dict.size())
    throw InvalidInput("coherence: column index out of range");
  return dict.entries().col(i).dot(dict.entries().col(j));
}

double mutual_coherence(const SteeringDictionary& dict) {
  const CxMat gram = dict.entries().adjoint() * dict.entries();
  double best = 0.0;
  for (int i = 0; i < gram.rows(); ++i)
    for (int j = 0; j < gram.cols(); ++j) {
      const double v = std::abs(gram(i, j) - (i == j ? 1.0 : 0.0));
      best = std::max(best, v);
    }
  return best;
}

void SourceScene::validate() const {
  const std::size_t k = doas_deg.size();
  if (powers.size() != k || phases_rad.size() != k)
    throw InvalidInput("scene lists must have equal length");
  for (double p : powers)
    if (!(p > 0.0)) throw InvalidInput("scene powers must be positive (linear scale)");
}

CxVec scene_amplitudes(const SteeringDictionary& dict, const SourceScene& scene) {
  scene.validate();
  CxVec x = CxVec::Zero(dict.size());
  for (int k = 0; k < scene.size(); ++k) {
    const int m = dict.grid().nearest_bin(scene.doas_deg[k]);
    x(m) += std::sqrt(scene.powers[k]) * std::exp(cxd(0.0, scene.phases_rad[k]));
  }
  return x;
}

namespace {

// Uniform double in (0,1] from the top 53 bits of the generator output.
double uniform53(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

// Standard complex normal (unit variance per complex element) via Box-Muller.
cxd complex_standard_normal(std::mt19937_64& rng) {
  const double r = std::sqrt(-std::log(uniform53(rng)));
  const double phi = 2.0 * kPi * uniform53(rng);
  return cxd(r * std::cos(phi), r * std::sin(phi));
}

}  // namespace

Snapshot synthesize(const SteeringDictionary& dict, const SourceScene& scene,
                    double sigma2, std::uint64_t seed) {
  scene.validate();
  if (sigma2 < 0.0) throw InvalidInput("noise variance must be >= 0");
  Snapshot snap;
  snap.sigma2 = sigma2;
  snap.seed = seed;
  snap.y = CxVec::Zero(dict.sensors());
  for (int k = 0; k < scene.size(); ++k) {
    const int m = dict.grid().nearest_bin(scene.doas_deg[k]);
    snap.source_bins.push_back(m);
    snap.snap_offsets_deg.push_back(dict.grid().angle_deg(m) - scene.doas_deg[k]);
    snap.y += dict.column(m) * std::sqrt(scene.powers[k]) *
              std::exp(cxd(0.0, scene.phases_rad[k]));
  }
  std::sort(snap.source_bins.begin(), snap.source_bins.end());
  if (sigma2 > 0.0) {
    std::mt19937_64 rng(seed);
    const double amp = std::sqrt(sigma2);
    for (int n = 0; n < dict.sensors(); ++n)
      snap.y(n) += amp * complex_standard_normal(rng);
  }
  return snap;
}

double sigma_for_snr(const SteeringDictionary& dict, const SourceScene& scene,
                     double snr_db) {
  if (scene.size() == 0) throw InvalidInput("SNR is undefined for an empty scene");
  const CxVec ax = dict.entries() * scene_amplitudes(dict, scene);
  const double signal = ax.squaredNorm();
  return signal * std::pow(10.0, -snr_db / 10.0) / dict.sensors();
}

}  // namespace lassodual
