#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace d2d {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Invalid user input (bad instance, bad config, malformed partition).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exponential enumeration was asked to run above its size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The LP engine hit its iteration guard or produced an inconsistent point.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comparison slack for game-level inequalities: 1e-9 scaled by magnitude.
inline double game_tolerance(double magnitude) {
  return 1e-9 * std::max(1.0, magnitude < 0 ? -magnitude : magnitude);
}

}  // namespace d2d
