#include "boxtrack/geometry.hpp"

#include "boxtrack/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace boxtrack {

namespace {

constexpr double kPi = std::numbers::pi;
// Intersections smaller than this (m^2) are treated as empty.
constexpr double kMinArea = 1e-12;

}  // namespace

double wrap_angle(double angle) {
    if (!std::isfinite(angle)) return angle;
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) wrapped += 2.0 * kPi;
    return wrapped;
}

std::array<Eigen::Vector2d, 4> OrientedBox3D::footprint() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const Eigen::Vector2d ax(c * size.x() / 2.0, s * size.x() / 2.0);
    const Eigen::Vector2d ay(-s * size.y() / 2.0, c * size.y() / 2.0);
    const Eigen::Vector2d ctr = center.head<2>();
    return {ctr - ax - ay, ctr + ax - ay, ctr + ax + ay, ctr - ax + ay};
}

bool OrientedBox3D::contains(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d d = p - center;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    // Inverse yaw rotation into the box frame.
    const double lx = c * d.x() + s * d.y();
    const double ly = -s * d.x() + c * d.y();
    return std::abs(lx) <= size.x() / 2.0 && std::abs(ly) <= size.y() / 2.0 &&
           std::abs(d.z()) <= size.z() / 2.0;
}

void validate(const OrientedBox3D& box) {
    if (!box.center.allFinite() || !box.size.allFinite() || !std::isfinite(box.yaw)) {
        throw InvalidBoxError("box has non-finite fields");
    }
    if ((box.size.array() <= 0.0).any()) {
        throw InvalidBoxError("box sizes must be strictly positive");
    }
}

void SrtsParams::validate() const {
    if (!(w_s > 0.0) || !(w_t > 0.0)) throw ConfigError("w_s and w_t must be > 0");
    if (!(w_r > 0.0 && w_r <= 1.0)) throw ConfigError("w_r must lie in (0, 1]");
    if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0)) {
        throw ConfigError("alpha, beta, gamma must be >= 0");
    }
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-12) {
        throw ConfigError("alpha + beta + gamma must equal 1");
    }
}

double srts_scale(const OrientedBox3D& reference, const OrientedBox3D& candidate, double w_s,
                  bool symmetric) {
    validate(reference);
    validate(candidate);
    double deviation = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double ref = reference.size[i];
        const double cand = candidate.size[i];
        const double ratio = symmetric ? std::max(ref, cand) / std::min(ref, cand) : cand / ref;
        deviation += std::abs(1.0 - ratio);
    }
    return 1.0 - std::min(deviation / w_s, 1.0);
}

double srts_rotation(double yaw_a, double yaw_b, double w_r) {
    const double theta = std::abs(wrap_angle(yaw_b - yaw_a));
    return std::max(0.0, 1.0 - theta / (w_r * kPi));
}

TranslationScore srts_translation(const OrientedBox3D& a, const OrientedBox3D& b, double w_t) {
    validate(a);
    validate(b);
    const double reach = (a.diagonal() + b.diagonal()) * w_t / 2.0;
    assert(reach > 0.0);
    const double t = (a.center - b.center).norm();
    return {std::max(0.0, (reach - t) / reach), reach < t ? 0 : 1};
}

double srts(const OrientedBox3D& a, const OrientedBox3D& b, const SrtsParams& params) {
    const TranslationScore tr = srts_translation(a, b, params.w_t);
    if (tr.penalty == 0) return 0.0;
    const double s = srts_scale(a, b, params.w_s, params.symmetric_scale);
    const double r = srts_rotation(a.yaw, b.yaw, params.w_r);
    return params.alpha * s + params.beta * tr.score + params.gamma * r;
}

namespace detail {

std::vector<Eigen::Vector2d> clip_convex(std::vector<Eigen::Vector2d> subject,
                                         const std::array<Eigen::Vector2d, 4>& clip) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(8);
    for (std::size_t e = 0; e < clip.size() && subject.size() >= 3; ++e) {
        const Eigen::Vector2d& p = clip[e];
        const Eigen::Vector2d edge = clip[(e + 1) % clip.size()] - p;
        // Signed distance-like value; >= 0 is the inner (left) side.
        auto side = [&](const Eigen::Vector2d& v) {
            const Eigen::Vector2d d = v - p;
            return edge.x() * d.y() - edge.y() * d.x();
        };
        next.clear();
        const std::size_t n = subject.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector2d& cur = subject[i];
            const Eigen::Vector2d& nxt = subject[(i + 1) % n];
            const double sc = side(cur);
            const double sn = side(nxt);
            if (sc >= 0.0) next.push_back(cur);
            if ((sc >= 0.0) != (sn >= 0.0)) {
                const double t = sc / (sc - sn);
                next.push_back(cur + t * (nxt - cur));
            }
        }
        subject.swap(next);
    }
    return subject;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Eigen::Vector2d& p = poly[i];
        const Eigen::Vector2d& q = poly[(i + 1) % poly.size()];
        twice += p.x() * q.y() - p.y() * q.x();
    }
    return twice / 2.0;
}

}  // namespace detail

namespace {

bool canonical_less(const OrientedBox3D& a, const OrientedBox3D& b) {
    const std::array<double, 7> ka{a.center.x(), a.center.y(), a.center.z(), a.size.x(),
                                   a.size.y(),   a.size.z(),   a.yaw};
    const std::array<double, 7> kb{b.center.x(), b.center.y(), b.center.z(), b.size.x(),
                                   b.size.y(),   b.size.z(),   b.yaw};
    return ka < kb;
}

}  // namespace

double rotated_iou_3d(const OrientedBox3D& first, const OrientedBox3D& second) {
    validate(first);
    validate(second);
    // Fixed argument order so the result is bitwise symmetric.
    const bool swap = canonical_less(second, first);
    const OrientedBox3D& a = swap ? second : first;
    const OrientedBox3D& b = swap ? first : second;
    const double za0 = a.center.z() - a.size.z() / 2.0;
    const double za1 = a.center.z() + a.size.z() / 2.0;
    const double zb0 = b.center.z() - b.size.z() / 2.0;
    const double zb1 = b.center.z() + b.size.z() / 2.0;
    const double dz = std::min(za1, zb1) - std::max(za0, zb0);
    if (dz <= 0.0) return 0.0;

    // Cheap reject on circumscribed circles.
    const double ra = a.size.head<2>().norm() / 2.0;
    const double rb = b.size.head<2>().norm() / 2.0;
    if ((a.center.head<2>() - b.center.head<2>()).norm() >= ra + rb) return 0.0;

    const auto fa = a.footprint();
    const auto fb = b.footprint();
    const std::vector<Eigen::Vector2d> subject(fa.begin(), fa.end());
    const double area = detail::polygon_area(detail::clip_convex(subject, fb));
    if (area < kMinArea) return 0.0;

    const double inter = area * dz;
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace boxtrack
