#pragma once

#include <Eigen/Core>

#include <optional>

namespace boxtrack {

struct ImageSize {
    int width = 0;
    int height = 0;
};

/// Lidar-to-camera chain in the KITTI layout:
/// pixel ~ projection * [rectification * lidar_to_cam * [p; 1]; 1].
struct Calibration {
    Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Identity();
    Eigen::Matrix3d rectification = Eigen::Matrix3d::Identity();
    Eigen::Matrix<double, 3, 4> lidar_to_cam = Eigen::Matrix<double, 3, 4>::Identity();
    /// Known image extent, when the calibration came with one.
    std::optional<ImageSize> image_size;

    /// Throws CalibrationError if the projection is rank deficient or either
    /// rotation block is not orthonormal within 1e-6.
    void validate() const;

    /// Sensor (lidar) point to rectified camera coordinates.
    [[nodiscard]] Eigen::Vector3d lidar_to_rect(const Eigen::Vector3d& p) const;
    /// Inverse of lidar_to_rect.
    [[nodiscard]] Eigen::Vector3d rect_to_lidar(const Eigen::Vector3d& p) const;

    /// Yaw, in the sensor frame, of the rectified camera x axis. Used to bridge
    /// KITTI rotation_y and sensor yaw.
    [[nodiscard]] double camera_x_heading() const;

    /// Axis permutation between a z-up, x-forward lidar and a y-down,
    /// z-forward camera, with a 1242x375 pinhole camera.
    static Calibration canonical();
};

}  // namespace boxtrack
