#pragma once

#include "boxtrack/geometry.hpp"
#include "boxtrack/motion.hpp"

#include <Eigen/Core>

#include <array>
#include <compare>
#include <span>
#include <string>
#include <vector>

namespace boxtrack {

/// Gaussian spatial density of one Bernoulli component.
struct TargetState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();
};

/// Track identity: the frame a track was born in and its birth order within
/// that frame. Smaller labels are older.
struct TrackLabel {
    int birth_frame = 0;
    int index = 0;

    auto operator<=>(const TrackLabel&) const = default;
};

struct Track {
    TrackLabel label;
    double existence = 0.0;
    TargetState state;
    std::string cls;
    int age = 0;

    [[nodiscard]] OrientedBox3D box() const;
};

struct Measurement {
    MeasVector z = MeasVector::Zero();
    std::string cls;
    double score = 1.0;

    static Measurement from_box(const OrientedBox3D& box, std::string cls, double score = 1.0);
    [[nodiscard]] OrientedBox3D box() const;
};

/// Every tunable of the filter. Defaults are the shipped tuning.
struct FilterConfig {
    MeasMatrix R = default_measurement_noise();
    double sigma_a = 17.89;      // m/s^2
    double sigma_alpha = 1.49;   // rad/s^2
    /// Per-step random walk on z, l, w, h (m), keeps the size covariance from collapsing.
    double size_noise_std = 0.01;
    double p_survival = 0.99;
    double p_detect = 0.9;
    /// Clutter density per unit measurement-space volume (m^6 rad).
    double clutter_intensity = 2.7634e-4;
    double p_na_threshold = 0.5;
    double r_birth = 0.1;
    double r_prune = 1e-3;
    /// Squared Mahalanobis gate; chi-square(7) quantile at 0.99.
    double gate = 18.475306906582357;
    /// Birth covariance standard deviations in state order.
    std::array<double, kStateDim> birth_std{1.0, 1.0, 0.5, 0.5, 0.5, 0.3, 0.2, 10.0, 0.5};
    double ukf_alpha = 1.0;
    double ukf_beta = 2.0;
    /// Classic choice kappa = 3 - n with n = 9 states + 2 noise inputs.
    double ukf_kappa = -8.0;
    double dt = 0.1;

    static MeasMatrix default_measurement_noise();
    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Marginal association of predicted tracks with measurements.
struct Association {
    /// p_a(i, j): probability that measurement j originated from track i.
    Eigen::MatrixXd p_assoc;
    /// p_na(j) = 1 - sum_i p_a(i, j).
    std::vector<double> p_na;
};

/// Propagates each track through the coordinated-turn model with the
/// unscented transform; existence is scaled by p_survival.
std::vector<Track> predict(std::span<const Track> tracks, double dt, const FilterConfig& config);

/// Gated Gaussian likelihoods of z = H x, weighted by existence and p_detect
/// against the clutter intensity, normalised per measurement.
Association associate(std::span<const Track> tracks, std::span<const Measurement> measurements,
                      const FilterConfig& config);

/// Bernoulli update from marginal association weights; the posterior mixture of
/// missed and detected hypotheses is moment-matched to one Gaussian.
std::vector<Track> update(std::span<const Track> tracks, std::span<const Measurement> measurements,
                          const Association& association, const FilterConfig& config);
std::vector<Track> update(std::span<const Track> tracks, std::span<const Measurement> measurements,
                          const FilterConfig& config);

/// New tracks for measurements whose p_na exceeds the threshold. Labels are
/// (frame, next_index++).
std::vector<Track> birth(std::span<const Measurement> measurements, std::span<const double> p_na,
                         const FilterConfig& config, int frame, int& next_index);

/// rho(n) for n = 0..|r| by recursive convolution; O(|r|^2).
std::vector<double> cardinality_distribution(std::span<const double> existences);

/// The round(sum r) tracks of highest existence, older labels first on ties.
std::vector<Track> extract(std::span<const Track> tracks);

/// Drops tracks with existence below r_prune.
std::vector<Track> prune(std::span<const Track> tracks, const FilterConfig& config);

/// Sequential LMB filter. One step runs predict, associate, update, birth,
/// prune and extract in that order.
class LmbFilter {
public:
    explicit LmbFilter(FilterConfig config = {});

    /// Returns the extracted tracks. Tracks born from this frame's unexplained
    /// measurements join the filter but are only eligible for extraction from
    /// the next step on.
    std::vector<Track> step(std::span<const Measurement> measurements, double dt);
    std::vector<Track> step(std::span<const Measurement> measurements) {
        return step(measurements, config_.dt);
    }

    [[nodiscard]] const std::vector<Track>& tracks() const { return tracks_; }
    [[nodiscard]] const FilterConfig& config() const { return config_; }
    [[nodiscard]] int frame() const { return frame_; }

private:
    FilterConfig config_;
    std::vector<Track> tracks_;
    int frame_ = 0;
};

namespace detail {

/// Cholesky-based square root with diagonal jitter retries. Throws
/// NumericalError if the matrix stays indefinite.
StateMatrix robust_cholesky(const StateMatrix& p);

/// Symmetrises and, if needed, jitters `p` until Cholesky succeeds.
StateMatrix condition_covariance(const StateMatrix& p);

}  // namespace detail

}  // namespace boxtrack
