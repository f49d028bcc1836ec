#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boxtrack/errors.hpp"
#include "boxtrack/geometry.hpp"
#include "oracles.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>

using namespace boxtrack;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

OrientedBox3D box(double x, double y, double z, double l, double w, double h, double yaw = 0.0) {
    return {{x, y, z}, {l, w, h}, yaw};
}

OrientedBox3D random_box(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> pos(-5.0, 5.0), size(0.5, 5.0), yaw(-kPi, kPi);
    return box(pos(gen), pos(gen), pos(gen) * 0.2, size(gen), size(gen), size(gen), yaw(gen));
}

}  // namespace

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(kPi) == Approx(kPi));
    CHECK(wrap_angle(-kPi) == Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == Approx(-kPi / 2));
    CHECK(wrap_angle(0.25) == 0.25);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> any(-100.0, 100.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = any(gen);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(oracle::near(std::remainder(a - w, 2 * kPi), 0.0, 1e-9));
    }
}

TEST_CASE("box validation rejects degenerate sizes") {
    CHECK_THROWS_AS(validate(box(0, 0, 0, 0, 1, 1)), InvalidBoxError);
    CHECK_THROWS_AS(validate(box(0, 0, 0, 1, -1, 1)), InvalidBoxError);
    CHECK_THROWS_AS(validate(box(NAN, 0, 0, 1, 1, 1)), InvalidBoxError);
    CHECK_THROWS_AS(srts(box(0, 0, 0, 1, 1, 0), box(0, 0, 0, 1, 1, 1)), InvalidBoxError);
    CHECK_THROWS_AS(rotated_iou_3d(box(0, 0, 0, 1, 1, 1), box(0, 0, 0, 1, INFINITY, 1)), InvalidBoxError);
    CHECK_NOTHROW(validate(box(1, 2, 3, 4, 2, 1.5, 0.2)));
}

TEST_CASE("srts parameter validation") {
    SrtsParams p;
    CHECK_NOTHROW(p.validate());
    p.w_r = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.gamma = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.w_s = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("scale score examples") {
    const auto unit = box(0, 0, 0, 1, 1, 1);
    CHECK(srts_scale(unit, unit, 0.3) == 1.0);
    CHECK(srts_scale(unit, box(0, 0, 0, 1.1, 1.1, 1.1), 0.3) == Approx(0.0).scale(1.0));
    CHECK(srts_scale(unit, box(0, 0, 0, 1.05, 1, 1), 0.3) == Approx(1.0 - 0.05 / 0.3));
}

TEST_CASE("scale score asymmetry and symmetric variant") {
    const auto a = box(0, 0, 0, 1, 1, 1);
    const auto b = box(0, 0, 0, 1.2, 1, 1);
    CHECK(srts_scale(a, b, 0.3) == Approx(1.0 - 0.2 / 0.3));
    CHECK(srts_scale(b, a, 0.3) == Approx(1.0 - (1.0 - 1.0 / 1.2) / 0.3));
    CHECK(srts_scale(a, b, 0.3, true) == Approx(srts_scale(b, a, 0.3, true)));
    CHECK(srts_scale(a, b, 0.3, true) == Approx(1.0 - 0.2 / 0.3));
}

TEST_CASE("rotation score examples") {
    CHECK(srts_rotation(0.4, 0.4, 0.5) == 1.0);
    CHECK(srts_rotation(0.0, kPi, 0.5) == 0.0);
    CHECK(srts_rotation(0.0, kPi / 4, 0.5) == Approx(0.5));
    // Wrapped difference: 3.0 and -3.0 are 2pi - 6 apart.
    CHECK(srts_rotation(3.0, -3.0, 0.5) == Approx(1.0 - (2 * kPi - 6.0) / (0.5 * kPi)));
}

TEST_CASE("rotation score is non-increasing in theta") {
    double previous = 2.0;
    for (int k = 0; k <= 200; ++k) {
        const double theta = 0.5 * kPi * k / 200.0;
        const double s = srts_rotation(0.0, theta, 0.5);
        CHECK(s <= previous);
        previous = s;
    }
}

TEST_CASE("translation score examples") {
    const auto a = box(0, 0, 0, 4, 2, 1.5);
    auto t = srts_translation(a, a, 1.0);
    CHECK(t.score == 1.0);
    CHECK(t.penalty == 1);

    t = srts_translation(a, box(2, 0, 0, 4, 2, 1.5), 1.0);
    const double d = std::sqrt(22.25);
    CHECK(t.score == Approx((d - 2.0) / d));
    CHECK(t.score == Approx(0.5760).epsilon(1e-4));
    CHECK(t.penalty == 1);

    t = srts_translation(box(0, 0, 0, 1, 1, 1), box(10, 0, 0, 1, 1, 1), 1.0);
    CHECK(t.score == 0.0);
    CHECK(t.penalty == 0);
}

TEST_CASE("srts composite examples") {
    const auto a = box(1, 2, -1, 4, 2, 1.5, 0.3);
    CHECK(srts(a, a) == Approx(1.0).epsilon(1e-12));
    const auto flipped = box(1, 2, -1, 4, 2, 1.5, 0.3 + kPi);
    CHECK(srts(a, flipped) == Approx(0.6).epsilon(1e-12));
    CHECK(srts(box(0, 0, 0, 1, 1, 1), box(10, 0, 0, 1, 1, 1)) == 0.0);
}

TEST_CASE("srts matches the scalar formula on random pairs") {
    std::mt19937_64 gen(11);
    for (int k = 0; k < 2000; ++k) {
        const auto a = random_box(gen);
        const auto b = random_box(gen);
        const double expected =
            oracle::srts(a.center.x(), a.center.y(), a.center.z(), a.size.x(), a.size.y(), a.size.z(), a.yaw,
                         b.center.x(), b.center.y(), b.center.z(), b.size.x(), b.size.y(), b.size.z(), b.yaw);
        CHECK(oracle::near(srts(a, b), expected, 1e-12));
    }
}

TEST_CASE("srts properties: range, self-similarity, rigid invariance") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> shift(-50.0, 50.0), turn(-kPi, kPi);
    for (int k = 0; k < 1000; ++k) {
        const auto a = random_box(gen);
        const auto b = random_box(gen);
        const double s = srts(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(srts(a, a) == Approx(1.0).epsilon(1e-12));
        const auto t = srts_translation(a, b, 1.0);
        CHECK((t.penalty == 0 || t.penalty == 1));

        const double phi = turn(gen);
        const Eigen::Vector3d offset(shift(gen), shift(gen), shift(gen));
        const Eigen::Matrix3d rz = Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        const OrientedBox3D a2(rz * a.center + offset, a.size, a.yaw + phi);
        const OrientedBox3D b2(rz * b.center + offset, b.size, b.yaw + phi);
        CHECK(oracle::near(srts(a2, b2), s, 1e-9));
    }
}

TEST_CASE("srts discriminates yaw where IoU is pi-periodic") {
    const auto a = box(0, 0, 0, 4, 2, 1.5, 0.0);
    double previous = 2.0;
    for (int k = 0; k <= 100; ++k) {
        const double dyaw = kPi * k / 100.0;
        const auto b = box(0, 0, 0, 4, 2, 1.5, dyaw);
        const double s = srts(a, b);
        if (dyaw <= 0.5 * kPi) {
            CHECK(s < previous);
        } else {
            CHECK(s <= previous);
        }
        previous = s;
        const auto b_pi = box(0, 0, 0, 4, 2, 1.5, dyaw + kPi);
        CHECK(oracle::near(rotated_iou_3d(a, b), rotated_iou_3d(a, b_pi), 1e-9));
    }
}

TEST_CASE("rotated IoU examples") {
    const auto a = box(0, 0, 0, 4, 2, 1.5, 0.7);
    CHECK(rotated_iou_3d(a, a) == Approx(1.0).epsilon(1e-12));
    CHECK(rotated_iou_3d(a, box(0, 0, 0, 4, 2, 1.5, 0.7 + kPi)) == Approx(1.0).epsilon(1e-9));
    CHECK(rotated_iou_3d(box(0, 0, 0, 1, 1, 1), box(0.5, 0, 0, 1, 1, 1)) == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(rotated_iou_3d(box(0, 0, 0, 1, 1, 1), box(5, 0, 0, 1, 1, 1)) == 0.0);
    CHECK(rotated_iou_3d(box(0, 0, 0, 1, 1, 1), box(0, 0, 2, 1, 1, 1)) == 0.0);
    // Touching faces have zero intersection.
    CHECK(rotated_iou_3d(box(0, 0, 0, 1, 1, 1), box(1, 0, 0, 1, 1, 1)) == Approx(0.0).scale(1.0));
}

TEST_CASE("rotated IoU equals axis-aligned IoU at zero yaw") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> pos(-2.0, 2.0), size(0.5, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const auto a = box(pos(gen), pos(gen), pos(gen), size(gen), size(gen), size(gen));
        const auto b = box(pos(gen), pos(gen), pos(gen), size(gen), size(gen), size(gen));
        double inter = 1.0;
        for (int d = 0; d < 3; ++d) {
            const double lo = std::max(a.center[d] - a.size[d] / 2, b.center[d] - b.size[d] / 2);
            const double hi = std::min(a.center[d] + a.size[d] / 2, b.center[d] + b.size[d] / 2);
            inter *= std::max(0.0, hi - lo);
        }
        const double expected = inter / (a.volume() + b.volume() - inter);
        CHECK(oracle::near(rotated_iou_3d(a, b), expected, 1e-9));
    }
}

TEST_CASE("rotated IoU is symmetric and bounded") {
    std::mt19937_64 gen(23);
    for (int k = 0; k < 2000; ++k) {
        const auto a = random_box(gen);
        const auto b = random_box(gen);
        const double ab = rotated_iou_3d(a, b);
        CHECK(ab == rotated_iou_3d(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("rotated IoU agrees with Monte-Carlo on a few pairs") {
    std::mt19937_64 gen(29);
    std::normal_distribution<double> jitter(0.0, 0.5);
    for (int k = 0; k < 5; ++k) {
        const auto a = random_box(gen);
        const OrientedBox3D b(a.center + Eigen::Vector3d(jitter(gen), jitter(gen), 0.2 * jitter(gen)),
                              a.size * 1.1, a.yaw + jitter(gen));
        CHECK(oracle::near(rotated_iou_3d(a, b), oracle::monte_carlo_iou(a, b, 200000, 100 + k), 2e-2));
    }
}

TEST_CASE("footprint corners and containment") {
    const auto b = box(1, 1, 0, 4, 2, 1, kPi / 2);
    const auto fp = b.footprint();
    double signed_area = 0.0;
    for (int k = 0; k < 4; ++k) {
        const auto& p = fp[k];
        const auto& q = fp[(k + 1) % 4];
        signed_area += p.x() * q.y() - q.x() * p.y();
    }
    CHECK(signed_area / 2 == Approx(8.0));
    CHECK(b.contains({1, 2.9, 0}));
    CHECK_FALSE(b.contains({2.9, 1, 0}));
    CHECK(b.contains({2, 3, 0.5}));
    CHECK_FALSE(b.contains({1, 1, 0.51}));
}
