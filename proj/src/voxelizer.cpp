#include "boxtrack/voxelizer.hpp"

#include "boxtrack/binary.hpp"
#include "boxtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <tuple>

namespace boxtrack {

void SemanticMap::validate() const {
    if (width <= 0 || height <= 0) throw InputError("semantic map must have positive extent");
    if (class_ids.size() != static_cast<std::size_t>(width) * height) {
        throw InputError("semantic map pixel count does not match width x height");
    }
    if (num_classes < 2 || num_classes > 256) throw ConfigError("num_classes must be in [2, 256]");
    for (auto id : class_ids) {
        if (id >= num_classes) throw InputError("semantic map class id out of range");
    }
}

Eigen::Vector3d GridSpec::cell_size() const {
    return (roi_max - roi_min).cwiseQuotient(Eigen::Vector3d(dims[0], dims[1], dims[2]));
}

std::size_t GridSpec::cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
}

bool GridSpec::in_roi(const Eigen::Vector3d& p) const {
    return (p.array() >= roi_min.array()).all() && (p.array() <= roi_max.array()).all();
}

std::array<int, 3> GridSpec::cell_of(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d cell = cell_size();
    std::array<int, 3> idx{};
    for (int k = 0; k < 3; ++k) {
        const auto i = static_cast<int>(std::floor((p[k] - roi_min[k]) / cell[k]));
        idx[k] = std::clamp(i, 0, dims[k] - 1);
    }
    return idx;
}

void GridSpec::validate() const {
    for (int k = 0; k < 3; ++k) {
        if (dims[k] <= 0) throw ConfigError("grid dims must be positive");
        if (!(roi_max[k] > roi_min[k])) throw ConfigError("grid ROI must have positive extent");
    }
    if (!roi_min.allFinite() || !roi_max.allFinite()) throw ConfigError("grid ROI must be finite");
}

std::string_view to_string(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::occupancy: return "occupancy";
        case FeatureMode::intensity: return "intensity";
        case FeatureMode::semantic: return "semantic";
    }
    return "unknown";
}

FeatureMode feature_mode_from_string(std::string_view name) {
    if (name == "occupancy") return FeatureMode::occupancy;
    if (name == "intensity") return FeatureMode::intensity;
    if (name == "semantic") return FeatureMode::semantic;
    throw ConfigError("unknown feature mode: " + std::string(name));
}

std::size_t VoxelGrid::nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](float v) { return v != 0.f; }));
}

std::vector<PixelProjection> project_to_image(const PointCloud& cloud, const Calibration& calib,
                                              std::optional<ImageSize> image) {
    calib.validate();
    if (!image) image = calib.image_size;
    if (!image) throw CalibrationError("image size unknown for projection");

    std::vector<PixelProjection> out;
    out.reserve(cloud.size());
    for (const auto& pt : cloud.points) {
        const Eigen::Vector3d rect = calib.lidar_to_rect(Eigen::Vector3d(pt.x, pt.y, pt.z));
        const Eigen::Vector3d pix = calib.projection.leftCols<3>() * rect + calib.projection.col(3);
        PixelProjection proj;
        proj.depth = pix.z();
        if (proj.depth > 0.0) {
            proj.u = pix.x() / pix.z();
            proj.v = pix.y() / pix.z();
            const double pu = std::floor(proj.u + 0.5);
            const double pv = std::floor(proj.v + 0.5);
            proj.in_view = pu >= 0.0 && pv >= 0.0 && pu < image->width && pv < image->height;
        }
        out.push_back(proj);
    }
    return out;
}

std::vector<std::optional<int>> paint_semantics(const PointCloud& cloud, const SemanticMap& map,
                                                const Calibration& calib) {
    map.validate();
    if (calib.image_size &&
        (calib.image_size->width != map.width || calib.image_size->height != map.height)) {
        throw InputError("semantic map size does not match the calibration image size");
    }
    const auto projections = project_to_image(cloud, calib, ImageSize{map.width, map.height});
    std::vector<std::optional<int>> labels(cloud.size());
    for (std::size_t i = 0; i < projections.size(); ++i) {
        const auto& p = projections[i];
        if (!p.in_view) continue;
        const int u = static_cast<int>(std::floor(p.u + 0.5));
        const int v = static_cast<int>(std::floor(p.v + 0.5));
        labels[i] = map.at(u, v);
    }
    return labels;
}

namespace {

struct Binned {
    std::size_t cell;
    float intensity;
    int label;  // -1 when unlabeled
};

}  // namespace

VoxelGrid voxelize(const PointCloud& cloud, std::span<const std::optional<int>> labels,
                   const GridSpec& spec, FeatureMode mode, const VoxelizeOptions& options) {
    spec.validate();
    if (mode == FeatureMode::semantic) {
        if (options.num_classes < 2) throw ConfigError("num_classes must be >= 2");
        if (labels.size() != cloud.size()) {
            throw InputError("semantic voxelization needs one label slot per point");
        }
    }

    VoxelGrid grid;
    grid.spec = spec;
    grid.mode = mode;
    grid.values.assign(spec.cell_count(), 0.f);

    std::vector<Binned> binned;
    binned.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& pt = cloud.points[i];
        const Eigen::Vector3d p(pt.x, pt.y, pt.z);
        if (!p.allFinite() || !spec.in_roi(p)) continue;
        const auto c = spec.cell_of(p);
        int label = -1;
        if (mode == FeatureMode::semantic && labels[i]) {
            label = *labels[i];
            if (label < 0 || label >= options.num_classes) {
                throw InputError("point label out of range");
            }
        }
        const float intensity = std::isfinite(pt.intensity) ? std::clamp(pt.intensity, 0.f, 1.f) : 0.f;
        binned.push_back({grid.index(c[0], c[1], c[2]), intensity, label});
    }
    // Sorting fixes the reduction order, which makes the float sums and
    // argmax independent of input order.
    std::sort(binned.begin(), binned.end(), [](const Binned& a, const Binned& b) {
        return std::tie(a.cell, a.intensity, a.label) < std::tie(b.cell, b.intensity, b.label);
    });

    std::vector<int> histogram(mode == FeatureMode::semantic ? options.num_classes : 0);
    for (std::size_t begin = 0; begin < binned.size();) {
        std::size_t end = begin;
        while (end < binned.size() && binned[end].cell == binned[begin].cell) ++end;
        float& value = grid.values[binned[begin].cell];

        switch (mode) {
            case FeatureMode::occupancy: value = 1.f; break;
            case FeatureMode::intensity: {
                double sum = 0.0;
                for (std::size_t k = begin; k < end; ++k) sum += binned[k].intensity;
                value = static_cast<float>(1.0 + sum / static_cast<double>(end - begin));
                break;
            }
            case FeatureMode::semantic: {
                std::fill(histogram.begin(), histogram.end(), 0);
                bool any = false;
                for (std::size_t k = begin; k < end; ++k) {
                    if (binned[k].label >= 0) {
                        ++histogram[binned[k].label];
                        any = true;
                    }
                }
                if (any) {
                    // max_element returns the first maximum, i.e. the smallest class id.
                    const auto best = std::max_element(histogram.begin(), histogram.end()) -
                                      histogram.begin();
                    value = static_cast<float>(1.0 + static_cast<double>(best) /
                                                         (options.num_classes - 1));
                } else if (options.unlabeled_as_occupied) {
                    value = 1.f;
                }
                break;
            }
        }
        begin = end;
    }
    return grid;
}

std::string encode_svxl(const VoxelGrid& grid) {
    std::string out;
    out.reserve(kSvxlHeaderSize + grid.values.size() * 4);
    out.append("SVXL", 4);
    binary::put_u32(out, kSvxlVersion);
    for (int d : grid.spec.dims) binary::put_u32(out, static_cast<std::uint32_t>(d));
    out.push_back(static_cast<char>(grid.mode));
    out.append(11, '\0');
    for (float v : grid.values) binary::put_f32(out, v);
    return out;
}

VoxelGrid decode_svxl(std::string_view bytes) {
    if (bytes.size() < kSvxlHeaderSize) {
        throw FormatError("truncated SVXL header", FormatError::npos, bytes.size());
    }
    if (bytes.substr(0, 4) != "SVXL") throw FormatError("bad SVXL magic", FormatError::npos, 0);
    if (binary::get_u32(bytes, 4) != kSvxlVersion) {
        throw FormatError("unsupported SVXL version", FormatError::npos, 4);
    }
    VoxelGrid grid;
    for (int k = 0; k < 3; ++k) {
        const std::uint32_t d = binary::get_u32(bytes, 8 + 4 * k);
        if (d == 0 || d > (1u << 20)) {
            throw FormatError("SVXL dimension out of range", FormatError::npos, 8 + 4 * k);
        }
        grid.spec.dims[k] = static_cast<int>(d);
    }
    const auto mode = static_cast<std::uint8_t>(bytes[20]);
    if (mode > 2) throw FormatError("unknown SVXL mode", FormatError::npos, 20);
    grid.mode = static_cast<FeatureMode>(mode);

    const std::size_t count = grid.spec.cell_count();
    const std::size_t payload = bytes.size() - kSvxlHeaderSize;
    if (payload != count * 4) {
        throw FormatError("SVXL payload size does not match dims", FormatError::npos,
                          kSvxlHeaderSize + std::min(payload, count * 4));
    }
    grid.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid.values[i] = binary::get_f32(bytes, kSvxlHeaderSize + 4 * i);
    }
    return grid;
}

}  // namespace boxtrack
