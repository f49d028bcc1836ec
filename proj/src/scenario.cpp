#include "boxtrack/scenario.hpp"

#include "boxtrack/errors.hpp"
#include "boxtrack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boxtrack {

namespace {

constexpr std::uint64_t kMeasurementStream = 0x9e3779b97f4a7c15ull;

void check_range(const Range& r, const char* name, bool positive) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo || (positive && !(r.lo > 0.0))) {
        throw ConfigError(std::string("invalid range for ") + name);
    }
}

struct Trajectory {
    int birth = 0;
    std::vector<OrientedBox3D> boxes;  // one per frame from birth

    [[nodiscard]] int death() const { return birth + static_cast<int>(boxes.size()); }
    [[nodiscard]] const OrientedBox3D* at(int frame) const {
        if (frame < birth || frame >= death()) return nullptr;
        return &boxes[static_cast<std::size_t>(frame - birth)];
    }
};

bool inside_roi(const OrientedBox3D& box, const ScenarioConfig& c) {
    for (const auto& corner : box.footprint()) {
        if (corner.x() < c.roi_min.x() || corner.x() > c.roi_max.x() ||
            corner.y() < c.roi_min.y() || corner.y() > c.roi_max.y()) {
            return false;
        }
    }
    return box.center.z() - box.size.z() / 2.0 >= c.roi_min.z() &&
           box.center.z() + box.size.z() / 2.0 <= c.roi_max.z();
}

MeasVector noise_scale_diagonal(const MeasMatrix& r) {
    return r.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

void ScenarioConfig::validate() const {
    if (num_targets < 0) throw ConfigError("num_targets must be >= 0");
    if (duration < 0) throw ConfigError("duration must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw ConfigError("p_detect must lie in [0, 1]");
    if (!(clutter_rate >= 0.0)) throw ConfigError("clutter_rate must be >= 0");
    if (!((roi_max - roi_min).array() > 0.0).all()) throw ConfigError("ROI must have positive extent");
    if (birth_frames.hi < birth_frames.lo || death_frames.hi < death_frames.lo) {
        throw ConfigError("frame ranges must have lo <= hi");
    }
    if (segment_frames.lo < 1 || segment_frames.hi < segment_frames.lo) {
        throw ConfigError("segment_frames must be >= 1 with lo <= hi");
    }
    check_range(speed, "speed", false);
    check_range(turn_rate, "turn_rate", false);
    check_range(center_z, "center_z", false);
    check_range(length, "length", true);
    check_range(width, "width", true);
    check_range(height, "height", true);
    if (!R.allFinite() || (R - R.transpose()).cwiseAbs().maxCoeff() > 0.0 ||
        (R.diagonal().array() < 0.0).any()) {
        throw ConfigError("R must be finite, symmetric, with a non-negative diagonal");
    }
    if (!(R - MeasMatrix(R.diagonal().asDiagonal())).isZero(0.0)) {
        throw ConfigError("simulated measurement noise must be diagonal");
    }
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

double ScenarioConfig::clutter_intensity() const {
    const double roi_volume = (roi_max - roi_min).prod();
    double size_volume = (length.hi - length.lo) * (width.hi - width.lo) * (height.hi - height.lo);
    if (size_volume <= 0.0) size_volume = 1.0;
    return clutter_rate / (roi_volume * size_volume * 2.0 * std::numbers::pi);
}

std::vector<FrameAnnotations> generate_truth(const ScenarioConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::vector<Trajectory> accepted;
    accepted.reserve(static_cast<std::size_t>(config.num_targets));

    for (int target = 0; target < config.num_targets; ++target) {
        bool placed = false;
        for (int attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
            Trajectory traj;
            traj.birth = rng.uniform_int(config.birth_frames.lo, config.birth_frames.hi);
            int death = rng.uniform_int(config.death_frames.lo, config.death_frames.hi);
            traj.birth = std::clamp(traj.birth, 0, std::max(config.duration - 1, 0));
            death = std::clamp(death, traj.birth + 1, std::max(config.duration, traj.birth + 1));
            if (config.duration == 0) break;

            StateVector s = StateVector::Zero();
            s[idx::l] = rng.uniform(config.length.lo, config.length.hi);
            s[idx::w] = rng.uniform(config.width.lo, config.width.hi);
            s[idx::h] = rng.uniform(config.height.lo, config.height.hi);
            s[idx::x] = rng.uniform(config.roi_min.x(), config.roi_max.x());
            s[idx::y] = rng.uniform(config.roi_min.y(), config.roi_max.y());
            s[idx::z] = rng.uniform(config.center_z.lo, config.center_z.hi);
            s[idx::yaw] = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));

            bool ok = true;
            int segment_left = 0;
            for (int frame = traj.birth; frame < death && ok; ++frame) {
                if (frame > traj.birth) s = ct_transition(s, config.dt);
                if (segment_left == 0) {
                    s[idx::v] = rng.uniform(config.speed.lo, config.speed.hi);
                    s[idx::yaw_rate] = rng.uniform(config.turn_rate.lo, config.turn_rate.hi);
                    segment_left = rng.uniform_int(config.segment_frames.lo, config.segment_frames.hi);
                }
                --segment_left;
                const OrientedBox3D box(s.segment<3>(idx::x), s.segment<3>(idx::l), s[idx::yaw]);
                ok = inside_roi(box, config);
                for (const Trajectory& other : accepted) {
                    if (!ok) break;
                    if (const OrientedBox3D* ob = other.at(frame)) {
                        ok = (ob->center - box.center).head<2>().norm() >= config.min_separation;
                    }
                }
                traj.boxes.push_back(box);
            }
            if (ok) {
                accepted.push_back(std::move(traj));
                placed = true;
            }
        }
        if (!placed && config.duration > 0) {
            throw ConfigError("ROI too small to place target " + std::to_string(target) +
                              " within max_attempts");
        }
    }

    std::vector<FrameAnnotations> truth(static_cast<std::size_t>(config.duration));
    for (int frame = 0; frame < config.duration; ++frame) {
        truth[static_cast<std::size_t>(frame)].frame = frame;
        for (std::size_t k = 0; k < accepted.size(); ++k) {
            if (const OrientedBox3D* box = accepted[k].at(frame)) {
                AnnotatedObject obj;
                obj.box = *box;
                obj.cls = config.cls;
                obj.track_id = static_cast<int>(k);
                truth[static_cast<std::size_t>(frame)].objects.push_back(obj);
            }
        }
    }
    return truth;
}

std::vector<std::vector<Measurement>> render_measurements(const std::vector<FrameAnnotations>& truth,
                                                          const ScenarioConfig& config) {
    config.validate();
    Rng rng(config.seed ^ kMeasurementStream);
    const MeasVector noise_std = noise_scale_diagonal(config.R);
    constexpr double kMinSize = 0.05;

    std::vector<std::vector<Measurement>> out;
    out.reserve(truth.size());
    for (const FrameAnnotations& frame : truth) {
        std::vector<Measurement> meas;
        for (const AnnotatedObject& obj : frame.objects) {
            if (!rng.bernoulli(config.p_detect)) continue;
            Measurement m = Measurement::from_box(obj.box, obj.cls);
            for (int k = 0; k < kMeasDim; ++k) {
                if (noise_std[k] > 0.0) m.z[k] += rng.normal(0.0, noise_std[k]);
            }
            for (int k = 3; k < 6; ++k) m.z[k] = std::max(m.z[k], kMinSize);
            m.z[6] = wrap_angle(m.z[6]);
            m.score = rng.uniform(0.6, 1.0);
            meas.push_back(std::move(m));
        }
        const std::uint64_t clutter = rng.poisson(config.clutter_rate);
        for (std::uint64_t c = 0; c < clutter; ++c) {
            Measurement m;
            m.z << rng.uniform(config.roi_min.x(), config.roi_max.x()),
                rng.uniform(config.roi_min.y(), config.roi_max.y()),
                rng.uniform(config.roi_min.z(), config.roi_max.z()),
                rng.uniform(config.length.lo, config.length.hi),
                rng.uniform(config.width.lo, config.width.hi),
                rng.uniform(config.height.lo, config.height.hi),
                wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
            m.cls = config.cls;
            m.score = rng.uniform(0.3, 0.8);
            meas.push_back(std::move(m));
        }
        out.push_back(std::move(meas));
    }
    return out;
}

Scenario simulate(const ScenarioConfig& config) {
    Scenario s;
    s.truth = generate_truth(config);
    s.measurements = render_measurements(s.truth, config);
    return s;
}

}  // namespace boxtrack
