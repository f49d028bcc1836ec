#pragma once

#include <Eigen/Core>

namespace boxtrack {

inline constexpr int kStateDim = 9;
inline constexpr int kMeasDim = 7;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;

/// Layout of the target state [x, y, z, l, w, h, yaw, v, yaw_rate]. The first
/// seven entries are the measured box.
namespace idx {
inline constexpr int x = 0;
inline constexpr int y = 1;
inline constexpr int z = 2;
inline constexpr int l = 3;
inline constexpr int w = 4;
inline constexpr int h = 5;
inline constexpr int yaw = 6;
inline constexpr int v = 7;
inline constexpr int yaw_rate = 8;
}  // namespace idx

/// Below this turn rate the straight-line Taylor form replaces the arc.
inline constexpr double kStraightTurnRate = 1e-6;

/// Coordinated-turn motion over `dt` seconds: the footprint centre follows a
/// circular arc of speed v and turn rate yaw_rate; all other entries except
/// yaw are constant. The result's yaw is wrapped into (-pi, pi].
StateVector ct_transition(const StateVector& state, double dt);

/// ct_transition followed by the white-noise inputs: longitudinal
/// acceleration `accel` and yaw acceleration `yaw_accel`, held over dt.
StateVector ct_transition_with_noise(const StateVector& state, double dt, double accel,
                                     double yaw_accel);

}  // namespace boxtrack
