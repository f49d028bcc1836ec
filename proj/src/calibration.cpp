#include "boxtrack/calibration.hpp"

#include "boxtrack/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace boxtrack {

namespace {

bool orthonormal(const Eigen::Matrix3d& m) {
    return (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-6;
}

}  // namespace

void Calibration::validate() const {
    if (!projection.allFinite() || !rectification.allFinite() || !lidar_to_cam.allFinite()) {
        throw CalibrationError("calibration contains non-finite entries");
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(projection);
    if (lu.rank() < 3) throw CalibrationError("projection matrix is rank deficient");
    if (!orthonormal(rectification)) {
        throw CalibrationError("rectification matrix is not orthonormal");
    }
    if (!orthonormal(lidar_to_cam.leftCols<3>())) {
        throw CalibrationError("lidar_to_cam rotation is not orthonormal");
    }
}

Eigen::Vector3d Calibration::lidar_to_rect(const Eigen::Vector3d& p) const {
    return rectification * (lidar_to_cam.leftCols<3>() * p + lidar_to_cam.col(3));
}

Eigen::Vector3d Calibration::rect_to_lidar(const Eigen::Vector3d& p) const {
    // Both rotation blocks are orthonormal, so their inverses are transposes.
    const Eigen::Vector3d cam = rectification.transpose() * p;
    return lidar_to_cam.leftCols<3>().transpose() * (cam - lidar_to_cam.col(3));
}

double Calibration::camera_x_heading() const {
    const Eigen::Vector3d axis =
        lidar_to_cam.leftCols<3>().transpose() * (rectification.transpose() * Eigen::Vector3d::UnitX());
    return std::atan2(axis.y(), axis.x());
}

Calibration Calibration::canonical() {
    Calibration c;
    c.projection << 721.5377, 0.0, 609.5593, 0.0,  //
        0.0, 721.5377, 172.854, 0.0,               //
        0.0, 0.0, 1.0, 0.0;
    c.lidar_to_cam << 0.0, -1.0, 0.0, 0.0,  //
        0.0, 0.0, -1.0, 0.0,                //
        1.0, 0.0, 0.0, 0.0;
    c.image_size = ImageSize{1242, 375};
    return c;
}

}  // namespace boxtrack
