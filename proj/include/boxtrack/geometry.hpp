#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace boxtrack {

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Yaw-only oriented cuboid in a z-up frame. `size` is (length, width, height);
/// length runs along the heading direction.
struct OrientedBox3D {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d size = Eigen::Vector3d::Ones();
    double yaw = 0.0;

    OrientedBox3D() = default;
    OrientedBox3D(const Eigen::Vector3d& c, const Eigen::Vector3d& s, double yaw_rad)
        : center(c), size(s), yaw(wrap_angle(yaw_rad)) {}

    [[nodiscard]] double volume() const { return size.prod(); }
    [[nodiscard]] double diagonal() const { return size.norm(); }

    /// BEV footprint corners, counter-clockwise.
    [[nodiscard]] std::array<Eigen::Vector2d, 4> footprint() const;

    /// True if `p` lies inside the closed box.
    [[nodiscard]] bool contains(const Eigen::Vector3d& p) const;
};

/// Throws InvalidBoxError unless every field is finite and every size is > 0.
void validate(const OrientedBox3D& box);

/// Strictness and weights of the scale-rotation-translation score.
struct SrtsParams {
    double w_s = 0.3;
    double w_t = 1.0;
    double w_r = 0.5;
    double alpha = 0.3;  // scale weight
    double beta = 0.3;   // translation weight
    double gamma = 0.4;  // rotation weight
    /// Use max/min per-axis size ratios instead of candidate/reference.
    bool symmetric_scale = false;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct TranslationScore {
    double score = 0.0;
    int penalty = 0;  // 0 when the bounding spheres do not touch, else 1
};

/// Scale sub-score. `reference` is the denominator of each size ratio unless
/// `symmetric` is set, in which case the larger size is divided by the smaller.
double srts_scale(const OrientedBox3D& reference, const OrientedBox3D& candidate, double w_s,
                  bool symmetric = false);

/// Rotation sub-score on the wrapped absolute yaw difference in [0, pi].
double srts_rotation(double yaw_a, double yaw_b, double w_r);

/// Translation sub-score and the intersection penalty. The radius of each box
/// is half its 3D diagonal scaled by `w_t`.
TranslationScore srts_translation(const OrientedBox3D& a, const OrientedBox3D& b, double w_t);

/// Composite score p_t * (alpha*S_s + beta*S_t + gamma*S_r); `a` is the reference box.
double srts(const OrientedBox3D& a, const OrientedBox3D& b, const SrtsParams& params = {});

/// Exact volumetric IoU of two yaw-rotated boxes: clipped BEV polygon area
/// times vertical overlap, over the union volume.
double rotated_iou_3d(const OrientedBox3D& a, const OrientedBox3D& b);

namespace detail {

/// Sutherland-Hodgman clip of a convex polygon by a convex CCW clip polygon.
std::vector<Eigen::Vector2d> clip_convex(std::vector<Eigen::Vector2d> subject,
                                         const std::array<Eigen::Vector2d, 4>& clip);

/// Shoelace area; positive for CCW input.
double polygon_area(const std::vector<Eigen::Vector2d>& poly);

}  // namespace detail

}  // namespace boxtrack
