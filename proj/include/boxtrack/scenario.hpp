#pragma once

#include "boxtrack/annotations.hpp"
#include "boxtrack/lmb.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace boxtrack {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct FrameRange {
    int lo = 0;
    int hi = 0;
};

/// Generative model for synthetic multi-target scenes. Targets follow the
/// coordinated-turn model with piecewise-constant speed and turn rate.
struct ScenarioConfig {
    int num_targets = 5;
    int duration = 100;  // frames
    double dt = 0.1;
    Eigen::Vector3d roi_min{0.0, -40.0, -2.73};
    Eigen::Vector3d roi_max{60.0, 40.0, 1.27};
    /// A target is alive on frames [birth, death); both are drawn per target.
    FrameRange birth_frames{0, 0};
    FrameRange death_frames{100, 100};
    MeasMatrix R = FilterConfig::default_measurement_noise();
    double p_detect = 0.9;
    double clutter_rate = 10.0;  // expected clutter boxes per frame
    std::uint64_t seed = 1;

    std::string cls = "Car";
    Range speed{1.0, 5.0};        // m/s
    Range turn_rate{-0.2, 0.2};   // rad/s
    FrameRange segment_frames{20, 50};
    Range center_z{-1.2, -0.8};
    /// Plausible car sizes; used for targets and for clutter boxes.
    Range length{3.5, 5.0};
    Range width{1.5, 2.0};
    Range height{1.4, 1.8};
    double min_separation = 4.0;  // m, between live target centres
    int max_attempts = 2000;      // rejection-sampling budget per target

    /// Throws ConfigError on invalid values.
    void validate() const;
    /// Clutter density over the measurement space (ROI x size box x yaw circle),
    /// the value a tracker should assume for this scenario.
    [[nodiscard]] double clutter_intensity() const;
};

struct Scenario {
    std::vector<FrameAnnotations> truth;
    std::vector<std::vector<Measurement>> measurements;
};

/// Per-frame ground truth with persistent track ids 0..num_targets-1.
/// Deterministic in config.seed. Throws ConfigError if a target cannot be
/// placed inside the ROI within the attempt budget.
std::vector<FrameAnnotations> generate_truth(const ScenarioConfig& config);

/// Missed detections, Gaussian noise with covariance R, and Poisson clutter.
/// Deterministic in config.seed; uses a stream independent of generate_truth.
std::vector<std::vector<Measurement>> render_measurements(const std::vector<FrameAnnotations>& truth,
                                                          const ScenarioConfig& config);

Scenario simulate(const ScenarioConfig& config);

}  // namespace boxtrack
