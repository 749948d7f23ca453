#pragma once

#include <Eigen/Core>

namespace nodal {

// Dimensions never exceed 3, so every small vector/matrix lives on the stack.
inline constexpr int kMaxDim = 3;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// A point in chart coordinates.
using Point = Vector;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace nodal
