#include "boxtrack/lmb.hpp"

#include "boxtrack/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace boxtrack {

namespace {

constexpr int kNoiseDim = 2;
constexpr int kAugDim = kStateDim + kNoiseDim;
constexpr int kSigmaCount = 2 * kAugDim + 1;
constexpr int kMaxJitterRounds = 12;

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

struct UnscentedWeights {
    double lambda;
    double mean0;
    double cov0;
    double rest;
};

UnscentedWeights unscented_weights(const FilterConfig& c) {
    const double n = kAugDim;
    const double lambda = c.ukf_alpha * c.ukf_alpha * (n + c.ukf_kappa) - n;
    return {lambda, lambda / (n + lambda),
            lambda / (n + lambda) + (1.0 - c.ukf_alpha * c.ukf_alpha + c.ukf_beta),
            1.0 / (2.0 * (n + lambda))};
}

// Weighted mean of states; yaw is averaged on the unit circle.
template <typename Points, typename Weights>
StateVector weighted_state_mean(const Points& points, const Weights& weights, std::size_t count) {
    StateVector mean = StateVector::Zero();
    double s = 0.0;
    double c = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        mean += weights[k] * points[k];
        s += weights[k] * std::sin(points[k][idx::yaw]);
        c += weights[k] * std::cos(points[k][idx::yaw]);
    }
    mean[idx::yaw] = std::atan2(s, c);
    return mean;
}

StateVector state_difference(const StateVector& a, const StateVector& b) {
    StateVector d = a - b;
    d[idx::yaw] = wrap_angle(d[idx::yaw]);
    return d;
}

}  // namespace

namespace detail {

StateMatrix robust_cholesky(const StateMatrix& p) {
    const StateMatrix sym = 0.5 * (p + p.transpose());
    Eigen::LLT<StateMatrix> llt(sym);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    const double scale = std::max(sym.diagonal().cwiseAbs().maxCoeff(), 1e-12);
    double jitter = 1e-12 * scale;
    for (int round = 0; round < kMaxJitterRounds; ++round, jitter *= 10.0) {
        llt.compute(sym + jitter * StateMatrix::Identity());
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError("covariance is not positive definite after jitter");
}

StateMatrix condition_covariance(const StateMatrix& p) {
    if (!p.allFinite()) throw NumericalError("covariance has non-finite entries");
    StateMatrix sym = 0.5 * (p + p.transpose());
    Eigen::LLT<StateMatrix> llt(sym);
    if (llt.info() == Eigen::Success) return sym;
    const double scale = std::max(sym.diagonal().cwiseAbs().maxCoeff(), 1e-12);
    double jitter = 1e-12 * scale;
    for (int round = 0; round < kMaxJitterRounds; ++round, jitter *= 10.0) {
        const StateMatrix candidate = sym + jitter * StateMatrix::Identity();
        llt.compute(candidate);
        if (llt.info() == Eigen::Success) return candidate;
    }
    throw NumericalError("covariance is not positive definite after jitter");
}

}  // namespace detail

OrientedBox3D Track::box() const {
    const StateVector& m = state.mean;
    return {m.segment<3>(idx::x), m.segment<3>(idx::l).cwiseMax(1e-3), m[idx::yaw]};
}

Measurement Measurement::from_box(const OrientedBox3D& box, std::string cls, double score) {
    Measurement m;
    m.z << box.center, box.size, wrap_angle(box.yaw);
    m.cls = std::move(cls);
    m.score = score;
    return m;
}

OrientedBox3D Measurement::box() const {
    return {z.segment<3>(0), z.segment<3>(3), z[6]};
}

MeasMatrix FilterConfig::default_measurement_noise() {
    MeasVector std_dev;
    std_dev << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.1;
    return std_dev.array().square().matrix().asDiagonal();
}

void FilterConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(p_survival, "p_survival");
    prob(p_detect, "p_detect");
    prob(p_na_threshold, "p_na_threshold");
    prob(r_birth, "r_birth");
    prob(r_prune, "r_prune");
    if (!(sigma_a >= 0.0) || !(sigma_alpha >= 0.0) || !(size_noise_std >= 0.0)) {
        throw ConfigError("process noise scales must be >= 0");
    }
    if (!(clutter_intensity >= 0.0)) throw ConfigError("clutter_intensity must be >= 0");
    if (!(gate > 0.0)) throw ConfigError("gate must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!R.allFinite() || (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("R must be finite and symmetric");
    }
    if (Eigen::LLT<MeasMatrix>(R).info() != Eigen::Success) {
        throw ConfigError("R must be positive definite");
    }
    for (double s : birth_std) {
        if (!(s > 0.0)) throw ConfigError("birth_std entries must be > 0");
    }
    if (!(kAugDim + unscented_weights(*this).lambda > 0.0)) {
        throw ConfigError("unscented parameters give a non-positive spread");
    }
}

std::vector<Track> predict(std::span<const Track> tracks, double dt, const FilterConfig& config) {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    const UnscentedWeights uw = unscented_weights(config);
    const double spread = std::sqrt(kAugDim + uw.lambda);

    std::array<double, kSigmaCount> wm{};
    std::array<double, kSigmaCount> wc{};
    wm.fill(uw.rest);
    wc.fill(uw.rest);
    wm[0] = uw.mean0;
    wc[0] = uw.cov0;

    const std::array<double, kNoiseDim> noise_std{config.sigma_a, config.sigma_alpha};

    std::vector<Track> out;
    out.reserve(tracks.size());
    std::array<StateVector, kSigmaCount> propagated;
    for (const Track& track : tracks) {
        const StateVector& m = track.state.mean;
        // Block-diagonal square root of blkdiag(P, Q); the noise block is diagonal,
        // so zero process noise stays well defined.
        const StateMatrix sqrt_p = detail::robust_cholesky(track.state.covariance);

        propagated[0] = ct_transition_with_noise(m, dt, 0.0, 0.0);
        for (int k = 0; k < kStateDim; ++k) {
            const StateVector delta = spread * sqrt_p.col(k);
            propagated[1 + k] = ct_transition_with_noise(m + delta, dt, 0.0, 0.0);
            propagated[1 + kAugDim + k] = ct_transition_with_noise(m - delta, dt, 0.0, 0.0);
        }
        for (int k = 0; k < kNoiseDim; ++k) {
            const double d = spread * noise_std[k];
            const double accel = k == 0 ? d : 0.0;
            const double yaw_accel = k == 1 ? d : 0.0;
            propagated[1 + kStateDim + k] = ct_transition_with_noise(m, dt, accel, yaw_accel);
            propagated[1 + kAugDim + kStateDim + k] =
                ct_transition_with_noise(m, dt, -accel, -yaw_accel);
        }

        Track next = track;
        next.state.mean = weighted_state_mean(propagated, wm, kSigmaCount);
        StateMatrix cov = StateMatrix::Zero();
        for (int k = 0; k < kSigmaCount; ++k) {
            const StateVector d = state_difference(propagated[k], next.state.mean);
            cov += wc[k] * d * d.transpose();
        }
        const double floor_var = config.size_noise_std * config.size_noise_std;
        for (int k : {idx::z, idx::l, idx::w, idx::h}) cov(k, k) += floor_var;
        next.state.covariance = detail::condition_covariance(cov);
        next.existence = clamp_probability(track.existence * config.p_survival);
        next.age = track.age + 1;
        out.push_back(std::move(next));
    }
    return out;
}

namespace {

struct Innovation {
    MeasVector residual;
    Eigen::LLT<MeasMatrix> s_llt;
    double log_det_s = 0.0;
};

Innovation innovation(const Track& track, const Measurement& meas, const FilterConfig& config) {
    Innovation inn;
    inn.residual = meas.z - track.state.mean.head<kMeasDim>();
    inn.residual[6] = wrap_angle(inn.residual[6]);
    const MeasMatrix s = track.state.covariance.topLeftCorner<kMeasDim, kMeasDim>() + config.R;
    inn.s_llt.compute(0.5 * (s + s.transpose()));
    if (inn.s_llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance is not positive definite");
    }
    const MeasMatrix l = inn.s_llt.matrixL();
    inn.log_det_s = 2.0 * l.diagonal().array().log().sum();
    return inn;
}

}  // namespace

Association associate(std::span<const Track> tracks, std::span<const Measurement> measurements,
                      const FilterConfig& config) {
    const auto nt = static_cast<Eigen::Index>(tracks.size());
    const auto nm = static_cast<Eigen::Index>(measurements.size());
    Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(nt, nm);
    const double log_norm = 0.5 * kMeasDim * std::log(2.0 * std::numbers::pi);

    for (Eigen::Index i = 0; i < nt; ++i) {
        const Track& track = tracks[i];
        const double rp = track.existence * config.p_detect;
        if (rp <= 0.0) continue;
        // Odds of "detected by this measurement" against "not detected".
        const double odds = rp / std::max(1.0 - rp, 1e-12);
        for (Eigen::Index j = 0; j < nm; ++j) {
            const Measurement& meas = measurements[j];
            if (meas.cls != track.cls) continue;
            const Innovation inn = innovation(track, meas, config);
            const double d2 = inn.residual.dot(inn.s_llt.solve(inn.residual));
            if (!(d2 <= config.gate)) continue;
            const double likelihood = std::exp(-0.5 * d2 - 0.5 * inn.log_det_s - log_norm);
            weight(i, j) = odds * likelihood;
        }
    }

    Association a;
    a.p_assoc = Eigen::MatrixXd::Zero(nt, nm);
    a.p_na.assign(static_cast<std::size_t>(nm), 1.0);
    for (Eigen::Index j = 0; j < nm; ++j) {
        const double total = config.clutter_intensity + weight.col(j).sum();
        if (total <= 0.0) continue;
        a.p_assoc.col(j) = weight.col(j) / total;
        a.p_na[static_cast<std::size_t>(j)] = config.clutter_intensity / total;
    }
    return a;
}

std::vector<Track> update(std::span<const Track> tracks, std::span<const Measurement> measurements,
                          const Association& association, const FilterConfig& config) {
    std::vector<Track> out;
    out.reserve(tracks.size());
    Eigen::Matrix<double, kMeasDim, kStateDim> h = Eigen::Matrix<double, kMeasDim, kStateDim>::Zero();
    h.leftCols<kMeasDim>().setIdentity();

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const Track& track = tracks[i];
        const auto row = static_cast<Eigen::Index>(i);
        Eigen::RowVectorXd beta = association.p_assoc.rows() > row
                                      ? Eigen::RowVectorXd(association.p_assoc.row(row))
                                      : Eigen::RowVectorXd::Zero(0);
        double detected = beta.sum();
        if (detected > 1.0) {
            beta /= detected;
            detected = 1.0;
        }
        const double missed = 1.0 - detected;
        const double r = track.existence;
        const double rp = r * config.p_detect;
        const double r_missed = rp < 1.0 ? r * (1.0 - config.p_detect) / (1.0 - rp) : 0.0;
        const double r_post = clamp_probability(detected + missed * r_missed);

        Track next = track;
        next.existence = r_post;
        if (detected > 0.0 && r_post > 0.0) {
            const StateMatrix& p = track.state.covariance;
            const MeasMatrix s = p.topLeftCorner<kMeasDim, kMeasDim>() + config.R;
            const Eigen::LLT<MeasMatrix> s_llt(0.5 * (s + s.transpose()));
            if (s_llt.info() != Eigen::Success) {
                throw NumericalError("innovation covariance is not positive definite");
            }
            const Eigen::Matrix<double, kStateDim, kMeasDim> pht = p * h.transpose();
            const Eigen::Matrix<double, kStateDim, kMeasDim> gain = s_llt.solve(pht.transpose()).transpose();
            // Joseph form keeps the posterior symmetric positive semi-definite.
            const StateMatrix ikh = StateMatrix::Identity() - gain * h;
            const StateMatrix p_post =
                ikh * p * ikh.transpose() + gain * config.R * gain.transpose();

            std::vector<StateVector> means;
            std::vector<double> weights;
            means.reserve(measurements.size() + 1);
            weights.reserve(measurements.size() + 1);
            if (missed * r_missed > 0.0) {
                means.push_back(track.state.mean);
                weights.push_back(missed * r_missed / r_post);
            }
            for (std::size_t j = 0; j < measurements.size(); ++j) {
                const double b = beta[static_cast<Eigen::Index>(j)];
                if (b <= 0.0) continue;
                MeasVector residual = measurements[j].z - track.state.mean.head<kMeasDim>();
                residual[6] = wrap_angle(residual[6]);
                StateVector m = track.state.mean + gain * residual;
                m[idx::yaw] = wrap_angle(m[idx::yaw]);
                means.push_back(m);
                weights.push_back(b / r_post);
            }
            const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
            for (double& w : weights) w /= wsum;

            const StateVector mean = weighted_state_mean(means, weights, means.size());
            StateMatrix cov = StateMatrix::Zero();
            for (std::size_t k = 0; k < means.size(); ++k) {
                const bool is_missed = missed * r_missed > 0.0 && k == 0;
                const StateVector d = state_difference(means[k], mean);
                cov += weights[k] * ((is_missed ? p : p_post) + d * d.transpose());
            }
            next.state.mean = mean;
            next.state.mean[idx::yaw] = wrap_angle(mean[idx::yaw]);
            next.state.covariance = detail::condition_covariance(cov);
        }
        out.push_back(std::move(next));
    }
    return out;
}

std::vector<Track> update(std::span<const Track> tracks, std::span<const Measurement> measurements,
                          const FilterConfig& config) {
    return update(tracks, measurements, associate(tracks, measurements, config), config);
}

std::vector<Track> birth(std::span<const Measurement> measurements, std::span<const double> p_na,
                         const FilterConfig& config, int frame, int& next_index) {
    if (p_na.size() != measurements.size()) {
        throw InputError("p_na must have one entry per measurement");
    }
    StateMatrix cov = StateMatrix::Zero();
    for (int k = 0; k < kStateDim; ++k) cov(k, k) = config.birth_std[k] * config.birth_std[k];

    std::vector<Track> born;
    for (std::size_t j = 0; j < measurements.size(); ++j) {
        if (!(p_na[j] > config.p_na_threshold)) continue;
        Track t;
        t.label = {frame, next_index++};
        t.existence = config.r_birth;
        t.state.mean.setZero();
        t.state.mean.head<kMeasDim>() = measurements[j].z;
        t.state.mean[idx::yaw] = wrap_angle(t.state.mean[idx::yaw]);
        t.state.covariance = cov;
        t.cls = measurements[j].cls;
        born.push_back(std::move(t));
    }
    return born;
}

std::vector<double> cardinality_distribution(std::span<const double> existences) {
    std::vector<double> rho{1.0};
    rho.reserve(existences.size() + 1);
    for (double r : existences) {
        if (!(r >= 0.0 && r <= 1.0)) throw InputError("existence probability outside [0, 1]");
        rho.push_back(0.0);
        // In-place convolution with (1 - r, r), highest order first.
        for (std::size_t n = rho.size() - 1; n > 0; --n) {
            rho[n] = rho[n] * (1.0 - r) + rho[n - 1] * r;
        }
        rho[0] *= 1.0 - r;
    }
    return rho;
}

std::vector<Track> extract(std::span<const Track> tracks) {
    double mean_cardinality = 0.0;
    for (const Track& t : tracks) mean_cardinality += t.existence;
    const auto count = std::min(static_cast<std::size_t>(std::llround(mean_cardinality)),
                                tracks.size());

    std::vector<const Track*> order;
    order.reserve(tracks.size());
    for (const Track& t : tracks) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const Track* a, const Track* b) {
        if (a->existence != b->existence) return a->existence > b->existence;
        return a->label < b->label;
    });

    std::vector<Track> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(*order[k]);
    return out;
}

std::vector<Track> prune(std::span<const Track> tracks, const FilterConfig& config) {
    std::vector<Track> out;
    out.reserve(tracks.size());
    for (const Track& t : tracks) {
        if (t.existence >= config.r_prune) out.push_back(t);
    }
    return out;
}

LmbFilter::LmbFilter(FilterConfig config) : config_(std::move(config)) { config_.validate(); }

std::vector<Track> LmbFilter::step(std::span<const Measurement> measurements, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    for (const Measurement& m : measurements) {
        if (!m.z.allFinite() || (m.z.segment<3>(3).array() <= 0.0).any()) {
            throw InputError("measurement has non-finite or non-positive fields");
        }
    }
    std::vector<Track> tracks = predict(tracks_, dt, config_);
    const Association association = associate(tracks, measurements, config_);
    tracks = update(tracks, measurements, association, config_);
    const std::size_t survivors = tracks.size();

    int next_index = 0;
    std::vector<Track> born = birth(measurements, association.p_na, config_, frame_, next_index);

    std::vector<Track> posterior = prune(std::span<const Track>(tracks.data(), survivors), config_);
    std::vector<Track> extracted = extract(posterior);

    tracks_ = std::move(posterior);
    tracks_.insert(tracks_.end(), std::make_move_iterator(born.begin()),
                   std::make_move_iterator(born.end()));
    ++frame_;
    return extracted;
}

}  // namespace boxtrack
