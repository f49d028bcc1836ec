#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boxtrack/config_io.hpp"
#include "boxtrack/errors.hpp"
#include "boxtrack/kitti_io.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace boxtrack;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = BOXTRACK_FIXTURES;

std::string fixture(const std::string& rel) { return read_file(kFixtures / rel); }

std::string hex_decode(const std::string& hex) {
    std::string out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
        if (hex[i] == '\n') {
            --i;
            continue;
        }
        out.push_back(static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
    }
    return out;
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "boxtrack_kitti_io_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("velodyne records decode bit-exactly") {
    const std::string bytes = fixture("velodyne/two_points.bin");
    CHECK(bytes == hex_decode(fixture("velodyne/two_points.hex")));
    const PointCloud cloud = parse_velodyne(bytes);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0].x == 1.0f);
    CHECK(cloud.points[0].y == 2.0f);
    CHECK(cloud.points[0].z == 3.0f);
    CHECK(cloud.points[0].intensity == 0.5f);
    CHECK(cloud.points[1].x == -1.5f);
    CHECK(cloud.points[1].y == 0.1f);
    CHECK(cloud.points[1].z == -2.25f);
    CHECK(cloud.points[1].intensity == 1.0f);
    CHECK(encode_velodyne(cloud) == bytes);

    CHECK(parse_velodyne(fixture("velodyne/one_point.bin")).size() == 1);
    CHECK(parse_velodyne(fixture("velodyne/empty.bin")).empty());
}

TEST_CASE("a trailing partial velodyne record reports its offset") {
    try {
        parse_velodyne(fixture("velodyne/partial.bin"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 16);
        CHECK(e.line() == FormatError::npos);
    }
}

TEST_CASE("label files round-trip byte-exactly") {
    for (const auto& [file, flavor] : {std::pair{"labels/tracking_gt.txt", LabelFlavor::tracking},
                                       std::pair{"labels/tracking_hyp.txt", LabelFlavor::tracking},
                                       std::pair{"labels/object.txt", LabelFlavor::object},
                                       std::pair{"labels/object_scored.txt", LabelFlavor::object},
                                       std::pair{"labels/empty.txt", LabelFlavor::object}}) {
        CAPTURE(file);
        const std::string text = fixture(file);
        const auto records = parse_labels(text, flavor);
        CHECK(format_labels(records, flavor) == text);
    }
}

TEST_CASE("label fields") {
    const auto records = parse_labels(fixture("labels/tracking_gt.txt"), LabelFlavor::tracking);
    REQUIRE(records.size() == 6);
    CHECK(records[0].type == "Car");
    CHECK(records[0].track_id == 0);
    CHECK(records[0].dimensions[2] == 4.433886);
    CHECK(records[0].location[2] == 13.410495);
    CHECK_FALSE(records[0].score.has_value());
    CHECK(records[2].is_dont_care());
    CHECK(records[2].track_id == -1);
    CHECK(records[5].frame == 3);
    CHECK(records[5].occluded == 2);

    const auto scored = parse_labels(fixture("labels/tracking_hyp.txt"), LabelFlavor::tracking);
    REQUIRE_FALSE(scored.empty());
    CHECK(scored[0].score.has_value());
}

TEST_CASE("malformed labels carry the line number") {
    auto line_of = [](const std::string& text, LabelFlavor flavor) -> std::size_t {
        try {
            parse_labels(text, flavor);
        } catch (const FormatError& e) {
            return e.line();
        }
        return 0;
    };
    const std::string good = "Car 0 0 0 0 0 10 10 1.5 1.6 4 1 1.5 10 0\n";
    CHECK(parse_labels(good, LabelFlavor::object).size() == 1);
    CHECK(line_of(good + "\nCar 0 0 0 0 0 10 10 1.5 1.6 4 1 1.5 10\n", LabelFlavor::object) == 3);
    CHECK(line_of(good + "Car 0 0 0 0 0 10 10 1.5 1.6 4 1 1.5 10 0 0.5 7\n", LabelFlavor::object) == 2);
    CHECK(line_of("Car 0 0 0 0 0 10 10 1.5 1.6 4 1 1.5 10 x\n", LabelFlavor::object) == 1);
    CHECK(line_of("Car 0 0 0 0 0 10 10 1.5 1.6 4 1 1.5 10 nan\n", LabelFlavor::object) == 1);
    CHECK(line_of("Car 0 0.5 0 0 0 10 10 1.5 1.6 4 1 1.5 10 0\n", LabelFlavor::object) == 1);
    CHECK(line_of("-1 0 " + good, LabelFlavor::tracking) == 1);
    CHECK(line_of(good, LabelFlavor::tracking) == 1);
}

TEST_CASE("calibration parsing") {
    const Calibration id = parse_calibration(fixture("calib/identity.txt"));
    CHECK(id.projection.isApprox(Eigen::Matrix<double, 3, 4>::Identity()));
    CHECK(id.rectification.isApprox(Eigen::Matrix3d::Identity()));

    const Calibration k = parse_calibration(fixture("calib/kitti_like.txt"));
    const Calibration nc = parse_calibration(fixture("calib/kitti_like_nocolon.txt"));
    CHECK(k.projection(0, 0) == 721.5377);
    CHECK(k.projection(1, 3) == 0.2163791);
    CHECK(k.projection == nc.projection);
    CHECK(k.rectification == nc.rectification);
    CHECK(k.lidar_to_cam == nc.lidar_to_cam);

    try {
        parse_calibration(fixture("calib/missing_tr.txt"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("Tr_velo_to_cam") != std::string::npos);
    }

    const Calibration again = parse_calibration(format_calibration(k));
    CHECK(again.projection == k.projection);
    CHECK(again.rectification == k.rectification);
    CHECK(again.lidar_to_cam == k.lidar_to_cam);

    CHECK_THROWS_AS(parse_calibration("P2: 1 0 0\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"),
                    FormatError);
    CHECK_THROWS_AS(parse_calibration("P2: 1 0 0 0 0 1 0 0 0 0 1 0\nR0_rect: 2 0 0 0 1 0 0 0 1\n"
                                      "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"),
                    CalibrationError);
}

TEST_CASE("label boxes convert to sensor boxes and back") {
    for (const Calibration& calib : {Calibration::canonical(), parse_calibration(fixture("calib/kitti_like.txt"))}) {
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int trial = 0; trial < 200; ++trial) {
            const OrientedBox3D box({20 + 15 * u(gen), 10 * u(gen), -1 + 0.5 * u(gen)},
                                    {4 + u(gen), 1.8 + 0.2 * u(gen), 1.5 + 0.2 * u(gen)}, std::numbers::pi * u(gen));
            LabelRecord rec;
            sensor_box_to_label(box, calib, rec);
            const OrientedBox3D back = label_to_sensor_box(rec, calib);
            CHECK((back.center - box.center).norm() < 1e-6);
            CHECK((back.size - box.size).norm() < 1e-9);
            CHECK(std::abs(wrap_angle(back.yaw - box.yaw)) < 1e-6);
            CHECK(rec.dimensions[0] == Approx(box.size.z()));
            CHECK(rec.dimensions[2] == Approx(box.size.x()));
        }
    }
}

TEST_CASE("canonical calibration: a car ahead facing forward") {
    const Calibration calib = Calibration::canonical();
    LabelRecord rec;
    rec.type = "Car";
    rec.dimensions = {1.5, 1.8, 4.0};
    rec.location = {0.0, 1.0, 10.0};  // bottom centre, camera frame
    rec.rotation_y = -std::numbers::pi / 2;
    const OrientedBox3D box = label_to_sensor_box(rec, calib);
    CHECK(box.center.x() == Approx(10.0));
    CHECK(box.center.y() == Approx(0.0).scale(1.0));
    CHECK(box.center.z() == Approx(-0.25));
    CHECK(box.size.x() == 4.0);
    CHECK(std::abs(box.yaw) < 1e-12);
}

TEST_CASE("labels group into frames with DontCare kept non-evaluable") {
    const auto calib = Calibration::canonical();
    const auto records = parse_labels(fixture("labels/tracking_gt.txt"), LabelFlavor::tracking);
    const auto frames = labels_to_frames(records, calib, LabelFlavor::tracking);
    REQUIRE(frames.size() == 4);
    CHECK(frames[0].objects.size() == 3);
    CHECK(frames[2].objects.empty());
    CHECK(frames[2].frame == 2);
    CHECK_FALSE(frames[0].objects[2].evaluable);
    CHECK_FALSE(frames[0].objects[2].track_id.has_value());
    CHECK(*frames[0].objects[1].track_id == 1);
    CHECK(labels_to_frames(records, calib, LabelFlavor::tracking, 6).size() == 6);

    const auto objects = parse_labels(fixture("labels/object.txt"), LabelFlavor::object);
    const auto single = labels_to_frames(objects, calib, LabelFlavor::object);
    REQUIRE(single.size() == 1);
    CHECK(single[0].objects.size() == 3);
    CHECK_FALSE(single[0].objects[2].evaluable);

    const auto back = frames_to_labels(frames, calib);
    int evaluable = 0;
    for (const auto& f : frames)
        for (const auto& o : f.objects) evaluable += o.evaluable;
    CHECK(back.size() >= static_cast<std::size_t>(evaluable));
}

TEST_CASE("semantic PNG round trip and atomic writes") {
    const fs::path dir = scratch_dir();
    SemanticMap map;
    map.width = 37;
    map.height = 11;
    map.num_classes = 19;
    for (int k = 0; k < map.width * map.height; ++k) map.class_ids.push_back(static_cast<std::uint8_t>(k % 19));
    write_semantic_png(dir / "map.png", map);
    const SemanticMap back = read_semantic_png(dir / "map.png", 19);
    CHECK(back.width == 37);
    CHECK(back.height == 11);
    CHECK(back.class_ids == map.class_ids);
    CHECK_THROWS_AS(read_semantic_png(dir / "map.png", 5), InputError);
    CHECK_THROWS_AS(read_semantic_png(dir / "missing.png", 19), InputError);

    write_file_atomic(dir / "a.txt", "first");
    write_file_atomic(dir / "a.txt", "second");
    CHECK(read_file(dir / "a.txt") == "second");
    CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
    CHECK_THROWS_AS(read_file(dir / "nope.txt"), InputError);
    fs::remove_all(dir);
}

TEST_CASE("config JSON round trips and rejects unknown keys") {
    FilterConfig f;
    f.p_detect = 0.77;
    f.R(3, 3) = 0.123;
    FilterConfig f2 = nlohmann::json(f).get<FilterConfig>();
    CHECK(f2.p_detect == 0.77);
    CHECK(f2.R == f.R);
    CHECK(f2.birth_std == f.birth_std);

    SrtsParams p;
    p.w_r = 0.25;
    p.symmetric_scale = true;
    const SrtsParams p2 = nlohmann::json(p).get<SrtsParams>();
    CHECK(p2.w_r == 0.25);
    CHECK(p2.symmetric_scale);

    ScenarioConfig s;
    s.seed = 99;
    s.speed = {2.0, 3.0};
    s.roi_min = {1, 2, -2};
    const ScenarioConfig s2 = nlohmann::json(s).get<ScenarioConfig>();
    CHECK(s2.seed == 99);
    CHECK(s2.speed.hi == 3.0);
    CHECK(s2.roi_min == s.roi_min);

    CHECK(nlohmann::json::parse(R"({"p_detect": 0.5})").get<FilterConfig>().p_detect == 0.5);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"pdetect": 0.5})").get<FilterConfig>(), ConfigError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"w_s": "x"})").get<SrtsParams>(), ConfigError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"R": [[1]]})").get<FilterConfig>(), ConfigError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"([1, 2])").get<ScenarioConfig>(), ConfigError);
}

TEST_CASE("mutated inputs either parse or raise an input error") {
    const std::vector<std::string> seeds{fixture("labels/tracking_gt.txt"), fixture("calib/kitti_like.txt"),
                                         fixture("velodyne/two_points.bin")};
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string s = seeds[trial % seeds.size()];
        const int edits = 1 + static_cast<int>(gen() % 8);
        for (int e = 0; e < edits && !s.empty(); ++e) {
            const std::size_t at = gen() % s.size();
            switch (gen() % 3) {
                case 0: s[at] = static_cast<char>(gen() % 256); break;
                case 1: s.erase(at, 1 + gen() % 4); break;
                default: s.insert(at, 1, " -.e0\n"[gen() % 6]); break;
            }
        }
        for (int parser = 0; parser < 4; ++parser) {
            try {
                switch (parser) {
                    case 0: parse_labels(s, LabelFlavor::tracking); break;
                    case 1: parse_labels(s, LabelFlavor::object); break;
                    case 2: parse_calibration(s); break;
                    default: parse_velodyne(s); break;
                }
            } catch (const InputError&) {
            } catch (const std::exception& e) {
                FAIL("unexpected exception: " << e.what());
            }
        }
    }
}
