#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lassodual {

using cxd = std::complex<double>;
using CxVec = Eigen::VectorXcd;
using CxMat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;

using IndexSet = std::vector<int>;  // sorted ascending, no duplicates

/// Errors raised when a grid, scene, or problem violates its invariants.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a restricted basis has linearly dependent columns.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace lassodual
