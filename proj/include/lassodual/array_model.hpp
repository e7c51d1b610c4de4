#pragma once

#include <cstdint>
#include <optional>

#include "lassodual/types.hpp"

namespace lassodual {

/// Strictly increasing DOA grid in degrees, all angles in [-90, 90].
class AngleGrid {
 public:
  static AngleGrid uniform(int count);
  static AngleGrid span(double lo_deg, double hi_deg, double step_deg);
  static AngleGrid from_angles(std::vector<double> angles_deg);

  int size() const { return static_cast<int>(angles_deg_.size()); }
  double angle_deg(int m) const { return angles_deg_.at(m); }
  const std::vector<double>& angles_deg() const { return angles_deg_; }

  /// Index of the grid bin closest to the given angle.
  int nearest_bin(double angle_deg) const;

 private:
  explicit AngleGrid(std::vector<double> angles);
  std::vector<double> angles_deg_;
};

/// N x M matrix of unit-norm ULA steering vectors, one column per grid angle.
class SteeringDictionary {
 public:
  SteeringDictionary(AngleGrid grid, int sensors);

  int sensors() const { return static_cast<int>(entries_.rows()); }
  int size() const { return static_cast<int>(entries_.cols()); }
  const AngleGrid& grid() const { return grid_; }
  const CxMat& entries() const { return entries_; }
  CxVec column(int m) const { return entries_.col(m); }

 private:
  AngleGrid grid_;
  CxMat entries_;
};

/// Inner product a_i^H a_j between two steering vectors.
cxd coherence(const SteeringDictionary& dict, int i, int j);

/// Largest off-diagonal magnitude of the Gram matrix, in [0, 1].
double mutual_coherence(const SteeringDictionary& dict);

/// Ground-truth sources: per source a DOA, a linear power, and a phase.
struct SourceScene {
  std::vector<double> doas_deg;
  std::vector<double> powers;      // linear scale, > 0
  std::vector<double> phases_rad;

  int size() const { return static_cast<int>(doas_deg.size()); }
  void validate() const;
};

/// Single noisy array snapshot together with the parameters that produced it.
struct Snapshot {
  CxVec y;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  IndexSet source_bins;              // grid bins the scene DOAs snapped to
  std::vector<double> snap_offsets_deg;  // per-source snapping offset
};

/// Complex amplitudes of the scene on the grid (DOAs snapped to nearest bin).
CxVec scene_amplitudes(const SteeringDictionary& dict, const SourceScene& scene);

/// y = A x_scene + n with circularly symmetric complex normal noise of
/// per-element variance sigma2. Deterministic given seed (mt19937_64 driving
/// a Box-Muller transform).
Snapshot synthesize(const SteeringDictionary& dict, const SourceScene& scene,
                    double sigma2, std::uint64_t seed);

/// Noise variance that hits the requested SNR for the (snapped) scene:
/// 10 log10(||A x||^2 / (N sigma2)) = snr_db.
double sigma_for_snr(const SteeringDictionary& dict, const SourceScene& scene,
                     double snr_db);

}  // namespace lassodual
