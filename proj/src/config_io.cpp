#include "boxtrack/config_io.hpp"

#include "boxtrack/errors.hpp"

#include <initializer_list>
#include <string>

namespace boxtrack {

using nlohmann::json;

namespace {

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known) found = found || key == k;
        if (!found) throw ConfigError(std::string("unknown key in ") + what + ": " + key);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
    }
}

json matrix_to_json(const MeasMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

void read_matrix(const json& j, const char* key, MeasMatrix& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    const json& rows = *it;
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(kMeasDim)) {
        throw ConfigError(std::string(key) + " must be a 7x7 array");
    }
    MeasMatrix m;
    for (int r = 0; r < kMeasDim; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(kMeasDim)) {
            throw ConfigError(std::string(key) + " must be a 7x7 array");
        }
        for (int c = 0; c < kMeasDim; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ConfigError(std::string(key) + " entries must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    out = m;
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

void read_vec3(const json& j, const char* key, Eigen::Vector3d& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_array() || it->size() != 3) throw ConfigError(std::string(key) + " must be [x, y, z]");
    for (int k = 0; k < 3; ++k) {
        const json& v = (*it)[static_cast<std::size_t>(k)];
        if (!v.is_number()) throw ConfigError(std::string(key) + " entries must be numbers");
        out[k] = v.get<double>();
    }
}

template <typename R>
json range_to_json(const R& r) {
    return json::array({r.lo, r.hi});
}

template <typename R>
void read_range(const json& j, const char* key, R& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw ConfigError(std::string(key) + " must be [lo, hi]");
    }
    out.lo = (*it)[0].get<decltype(out.lo)>();
    out.hi = (*it)[1].get<decltype(out.hi)>();
}

}  // namespace

void to_json(json& j, const FilterConfig& c) {
    j = json{{"R", matrix_to_json(c.R)},
             {"sigma_a", c.sigma_a},
             {"sigma_alpha", c.sigma_alpha},
             {"size_noise_std", c.size_noise_std},
             {"p_survival", c.p_survival},
             {"p_detect", c.p_detect},
             {"clutter_intensity", c.clutter_intensity},
             {"p_na_threshold", c.p_na_threshold},
             {"r_birth", c.r_birth},
             {"r_prune", c.r_prune},
             {"gate", c.gate},
             {"birth_std", c.birth_std},
             {"ukf_alpha", c.ukf_alpha},
             {"ukf_beta", c.ukf_beta},
             {"ukf_kappa", c.ukf_kappa},
             {"dt", c.dt}};
}

void from_json(const json& j, FilterConfig& c) {
    require_object(j, "filter config");
    reject_unknown(j,
                   {"R", "sigma_a", "sigma_alpha", "size_noise_std", "p_survival", "p_detect",
                    "clutter_intensity", "p_na_threshold", "r_birth", "r_prune", "gate", "birth_std",
                    "ukf_alpha", "ukf_beta", "ukf_kappa", "dt"},
                   "filter config");
    read_matrix(j, "R", c.R);
    read(j, "sigma_a", c.sigma_a);
    read(j, "sigma_alpha", c.sigma_alpha);
    read(j, "size_noise_std", c.size_noise_std);
    read(j, "p_survival", c.p_survival);
    read(j, "p_detect", c.p_detect);
    read(j, "clutter_intensity", c.clutter_intensity);
    read(j, "p_na_threshold", c.p_na_threshold);
    read(j, "r_birth", c.r_birth);
    read(j, "r_prune", c.r_prune);
    read(j, "gate", c.gate);
    read(j, "birth_std", c.birth_std);
    read(j, "ukf_alpha", c.ukf_alpha);
    read(j, "ukf_beta", c.ukf_beta);
    read(j, "ukf_kappa", c.ukf_kappa);
    read(j, "dt", c.dt);
    c.validate();
}

void to_json(json& j, const SrtsParams& p) {
    j = json{{"w_s", p.w_s},     {"w_t", p.w_t},   {"w_r", p.w_r},
             {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
             {"symmetric_scale", p.symmetric_scale}};
}

void from_json(const json& j, SrtsParams& p) {
    require_object(j, "srts params");
    reject_unknown(j, {"w_s", "w_t", "w_r", "alpha", "beta", "gamma", "symmetric_scale"}, "srts params");
    read(j, "w_s", p.w_s);
    read(j, "w_t", p.w_t);
    read(j, "w_r", p.w_r);
    read(j, "alpha", p.alpha);
    read(j, "beta", p.beta);
    read(j, "gamma", p.gamma);
    read(j, "symmetric_scale", p.symmetric_scale);
    p.validate();
}

void to_json(json& j, const ScenarioConfig& c) {
    j = json{{"num_targets", c.num_targets},
             {"duration", c.duration},
             {"dt", c.dt},
             {"roi_min", vec3_to_json(c.roi_min)},
             {"roi_max", vec3_to_json(c.roi_max)},
             {"birth_frames", range_to_json(c.birth_frames)},
             {"death_frames", range_to_json(c.death_frames)},
             {"R", matrix_to_json(c.R)},
             {"p_detect", c.p_detect},
             {"clutter_rate", c.clutter_rate},
             {"seed", c.seed},
             {"cls", c.cls},
             {"speed", range_to_json(c.speed)},
             {"turn_rate", range_to_json(c.turn_rate)},
             {"segment_frames", range_to_json(c.segment_frames)},
             {"center_z", range_to_json(c.center_z)},
             {"length", range_to_json(c.length)},
             {"width", range_to_json(c.width)},
             {"height", range_to_json(c.height)},
             {"min_separation", c.min_separation},
             {"max_attempts", c.max_attempts}};
}

void from_json(const json& j, ScenarioConfig& c) {
    require_object(j, "scenario config");
    reject_unknown(j,
                   {"num_targets", "duration", "dt", "roi_min", "roi_max", "birth_frames",
                    "death_frames", "R", "p_detect", "clutter_rate", "seed", "cls", "speed",
                    "turn_rate", "segment_frames", "center_z", "length", "width", "height",
                    "min_separation", "max_attempts"},
                   "scenario config");
    read(j, "num_targets", c.num_targets);
    read(j, "duration", c.duration);
    read(j, "dt", c.dt);
    read_vec3(j, "roi_min", c.roi_min);
    read_vec3(j, "roi_max", c.roi_max);
    read_range(j, "birth_frames", c.birth_frames);
    read_range(j, "death_frames", c.death_frames);
    read_matrix(j, "R", c.R);
    read(j, "p_detect", c.p_detect);
    read(j, "clutter_rate", c.clutter_rate);
    read(j, "seed", c.seed);
    read(j, "cls", c.cls);
    read_range(j, "speed", c.speed);
    read_range(j, "turn_rate", c.turn_rate);
    read_range(j, "segment_frames", c.segment_frames);
    read_range(j, "center_z", c.center_z);
    read_range(j, "length", c.length);
    read_range(j, "width", c.width);
    read_range(j, "height", c.height);
    read(j, "min_separation", c.min_separation);
    read(j, "max_attempts", c.max_attempts);
    c.validate();
}

}  // namespace boxtrack
