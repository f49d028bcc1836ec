#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boxtrack/errors.hpp"
#include "boxtrack/rng.hpp"
#include "boxtrack/scenario.hpp"

#include <cmath>
#include <map>

using namespace boxtrack;
using doctest::Approx;

TEST_CASE("rng is reproducible and roughly calibrated") {
    Rng a(5), b(5);
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());

    Rng r(11);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double x = r.normal(2.0, 3.0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 2.0) < 0.03);
    CHECK(std::abs(sq / n - mean * mean - 9.0) < 0.15);

    for (double lambda : {0.5, 4.0, 75.0}) {
        double s = 0;
        for (int k = 0; k < 20000; ++k) s += static_cast<double>(r.poisson(lambda));
        CHECK(std::abs(s / 20000 - lambda) < 4.0 * std::sqrt(lambda / 20000));
    }
    for (int k = 0; k < 1000; ++k) {
        const int v = r.uniform_int(-2, 3);
        CHECK(v >= -2);
        CHECK(v <= 3);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("clutter intensity of the default scene") {
    ScenarioConfig c;
    CHECK(c.clutter_intensity() == Approx(2.7634e-4).epsilon(1e-4));
    c.clutter_rate = 0.0;
    CHECK(c.clutter_intensity() == 0.0);
}

TEST_CASE("config validation") {
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = [](auto mutate) {
        ScenarioConfig x;
        mutate(x);
        CHECK_THROWS_AS(x.validate(), ConfigError);
    };
    bad([](ScenarioConfig& x) { x.num_targets = -1; });
    bad([](ScenarioConfig& x) { x.dt = 0.0; });
    bad([](ScenarioConfig& x) { x.p_detect = 1.5; });
    bad([](ScenarioConfig& x) { x.clutter_rate = -1.0; });
    bad([](ScenarioConfig& x) { x.roi_max.x() = x.roi_min.x(); });
    bad([](ScenarioConfig& x) { x.speed = {3.0, 1.0}; });
    bad([](ScenarioConfig& x) { x.segment_frames = {0, 5}; });
    bad([](ScenarioConfig& x) { x.R(0, 1) = x.R(1, 0) = 0.01; });
    bad([](ScenarioConfig& x) { x.R(2, 2) = -1.0; });
}

TEST_CASE("no targets gives empty truth of the right length") {
    ScenarioConfig c;
    c.num_targets = 0;
    c.duration = 7;
    const auto truth = generate_truth(c);
    REQUIRE(truth.size() == 7);
    for (int f = 0; f < 7; ++f) {
        CHECK(truth[f].frame == f);
        CHECK(truth[f].objects.empty());
    }
}

TEST_CASE("straight motion without turn rate") {
    ScenarioConfig c;
    c.turn_rate = {0.0, 0.0};
    c.num_targets = 3;
    c.duration = 40;
    const auto truth = generate_truth(c);
    std::map<int, std::vector<OrientedBox3D>> tracks;
    for (const auto& f : truth)
        for (const auto& o : f.objects) tracks[*o.track_id].push_back(o.box);
    REQUIRE(tracks.size() == 3);
    for (const auto& [id, boxes] : tracks) {
        REQUIRE(boxes.size() >= 3);
        const Eigen::Vector2d dir(std::cos(boxes.front().yaw), std::sin(boxes.front().yaw));
        for (const auto& b : boxes) {
            CHECK(std::abs(b.yaw - boxes.front().yaw) < 1e-12);
            const Eigen::Vector2d d = (b.center - boxes.front().center).head<2>();
            CHECK(std::abs(dir.x() * d.y() - dir.y() * d.x()) < 1e-9);
            CHECK(dir.dot(d) >= -1e-9);
        }
    }
}

TEST_CASE("truth stays inside the ROI with separated, persistent targets") {
    ScenarioConfig c;
    c.seed = 3;
    const auto truth = generate_truth(c);
    REQUIRE(truth.size() == static_cast<std::size_t>(c.duration));
    for (const auto& f : truth) {
        for (std::size_t i = 0; i < f.objects.size(); ++i) {
            const auto& o = f.objects[i];
            REQUIRE(o.track_id.has_value());
            CHECK(*o.track_id >= 0);
            CHECK(*o.track_id < c.num_targets);
            CHECK(o.cls == "Car");
            for (const auto& p : o.box.footprint()) {
                CHECK(p.x() >= c.roi_min.x());
                CHECK(p.x() <= c.roi_max.x());
                CHECK(p.y() >= c.roi_min.y());
                CHECK(p.y() <= c.roi_max.y());
            }
            for (std::size_t j = i + 1; j < f.objects.size(); ++j)
                CHECK((f.objects[j].box.center - o.box.center).head<2>().norm() >= c.min_separation);
        }
    }
}

TEST_CASE("an ROI too small for a car is rejected") {
    ScenarioConfig c;
    c.roi_max = {3.0, 1.0, 1.27};
    c.roi_min = {0.0, 0.0, -2.73};
    c.max_attempts = 50;
    CHECK_THROWS_AS(generate_truth(c), ConfigError);
}

TEST_CASE("same seed, same scenario; different seed, different scenario") {
    ScenarioConfig c;
    c.seed = 42;
    const auto a = simulate(c);
    const auto b = simulate(c);
    REQUIRE(a.measurements.size() == b.measurements.size());
    for (std::size_t f = 0; f < a.measurements.size(); ++f) {
        REQUIRE(a.measurements[f].size() == b.measurements[f].size());
        for (std::size_t k = 0; k < a.measurements[f].size(); ++k) {
            CHECK(a.measurements[f][k].z == b.measurements[f][k].z);
            CHECK(a.measurements[f][k].score == b.measurements[f][k].score);
        }
        REQUIRE(a.truth[f].objects.size() == b.truth[f].objects.size());
        for (std::size_t k = 0; k < a.truth[f].objects.size(); ++k)
            CHECK(a.truth[f].objects[k].box.center == b.truth[f].objects[k].box.center);
    }
    c.seed = 43;
    const auto d = simulate(c);
    CHECK(d.truth[0].objects[0].box.center != a.truth[0].objects[0].box.center);
}

TEST_CASE("noiseless, always-detected, clutter-free measurements equal the truth") {
    ScenarioConfig c;
    c.p_detect = 1.0;
    c.clutter_rate = 0.0;
    c.R = MeasMatrix::Zero();
    const auto s = simulate(c);
    for (std::size_t f = 0; f < s.truth.size(); ++f) {
        REQUIRE(s.measurements[f].size() == s.truth[f].objects.size());
        for (std::size_t k = 0; k < s.measurements[f].size(); ++k) {
            const auto& m = s.measurements[f][k];
            CHECK(m.z == Measurement::from_box(s.truth[f].objects[k].box, "Car").z);
            CHECK(m.cls == "Car");
        }
    }
}

TEST_CASE("no detection probability leaves only clutter") {
    ScenarioConfig c;
    c.p_detect = 0.0;
    c.clutter_rate = 3.0;
    const auto s = simulate(c);
    for (const auto& frame : s.measurements) {
        for (const auto& m : frame) {
            CHECK(m.z[0] >= c.roi_min.x());
            CHECK(m.z[0] < c.roi_max.x());
            CHECK(m.z[3] >= c.length.lo);
            CHECK(m.z[3] < c.length.hi);
        }
    }
    c.clutter_rate = 0.0;
    for (const auto& frame : simulate(c).measurements) CHECK(frame.empty());
}

TEST_CASE("detection rate matches p_detect over many target-frames") {
    int truths = 0, detections = 0;
    for (std::uint64_t seed = 1; truths < 10000; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.clutter_rate = 0.0;
        const auto s = simulate(c);
        for (std::size_t f = 0; f < s.truth.size(); ++f) {
            truths += static_cast<int>(s.truth[f].objects.size());
            detections += static_cast<int>(s.measurements[f].size());
        }
    }
    const double rate = static_cast<double>(detections) / truths;
    CHECK(rate >= 0.885);
    CHECK(rate <= 0.915);
}

TEST_CASE("measurement noise has covariance R") {
    MeasVector sum = MeasVector::Zero(), sq = MeasVector::Zero();
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        ScenarioConfig c;
        c.seed = seed;
        c.p_detect = 1.0;
        c.clutter_rate = 0.0;
        const auto s = simulate(c);
        for (std::size_t f = 0; f < s.truth.size(); ++f) {
            for (std::size_t k = 0; k < s.truth[f].objects.size(); ++k) {
                MeasVector e = s.measurements[f][k].z - Measurement::from_box(s.truth[f].objects[k].box, "").z;
                e[6] = wrap_angle(e[6]);
                sum += e;
                sq += e.cwiseProduct(e);
                ++n;
            }
        }
    }
    REQUIRE(n > 3000);
    const MeasVector mean = sum / n;
    const MeasVector var = sq / n - mean.cwiseProduct(mean);
    const MeasVector expected = ScenarioConfig{}.R.diagonal();
    for (int k = 0; k < kMeasDim; ++k) {
        CAPTURE(k);
        CHECK(std::abs(var[k] / expected[k] - 1.0) < 0.1);
        CHECK(std::abs(mean[k]) < 4.0 * std::sqrt(expected[k] / n));
    }
}

TEST_CASE("clutter count is Poisson with the configured mean") {
    ScenarioConfig c;
    c.p_detect = 0.0;
    c.clutter_rate = 10.0;
    c.duration = 2000;
    c.num_targets = 0;
    const auto s = simulate(c);
    double total = 0;
    for (const auto& frame : s.measurements) total += static_cast<double>(frame.size());
    const double mean = total / c.duration;
    CHECK(std::abs(mean - 10.0) < 3.0 * std::sqrt(10.0 / c.duration));
}
