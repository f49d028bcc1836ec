#pragma once

#include "boxtrack/calibration.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace boxtrack {

struct LidarPoint {
    float x = 0.f;
    float y = 0.f;
    float z = 0.f;
    float intensity = 0.f;
};

struct PointCloud {
    std::vector<LidarPoint> points;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] bool empty() const { return points.empty(); }
};

/// Per-pixel class ids of one camera image, row-major.
struct SemanticMap {
    int width = 0;
    int height = 0;
    int num_classes = 19;
    std::vector<std::uint8_t> class_ids;

    [[nodiscard]] std::uint8_t at(int u, int v) const {
        return class_ids[static_cast<std::size_t>(v) * width + u];
    }
    /// Throws InputError on size mismatch or out-of-range class ids.
    void validate() const;
};

/// Region of interest and grid resolution. Defaults are the KITTI front-view
/// ROI [0,60] x [-40,40] x [-2.73,1.27] m at 768 x 1024 x 21 cells.
struct GridSpec {
    Eigen::Vector3d roi_min{0.0, -40.0, -2.73};
    Eigen::Vector3d roi_max{60.0, 40.0, 1.27};
    std::array<int, 3> dims{768, 1024, 21};

    [[nodiscard]] Eigen::Vector3d cell_size() const;
    [[nodiscard]] std::size_t cell_count() const;
    [[nodiscard]] bool in_roi(const Eigen::Vector3d& p) const;
    /// Cell of an in-ROI point; the upper ROI face maps to the last cell.
    [[nodiscard]] std::array<int, 3> cell_of(const Eigen::Vector3d& p) const;
    /// Throws ConfigError on zero or negative extents.
    void validate() const;
};

enum class FeatureMode : std::uint8_t { occupancy = 0, intensity = 1, semantic = 2 };

std::string_view to_string(FeatureMode mode);
/// Throws ConfigError on an unknown name.
FeatureMode feature_mode_from_string(std::string_view name);

/// Dense grid, x-major then y then z (z varies fastest).
struct VoxelGrid {
    GridSpec spec;
    FeatureMode mode = FeatureMode::occupancy;
    std::vector<float> values;

    [[nodiscard]] std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * spec.dims[1] + iy) * spec.dims[2] + iz;
    }
    [[nodiscard]] float at(int ix, int iy, int iz) const { return values[index(ix, iy, iz)]; }
    [[nodiscard]] std::size_t nonzero_count() const;
};

struct PixelProjection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
    bool in_view = false;
};

/// Projects every point through lidar_to_cam, rectification and projection.
/// A point is in view iff its depth is positive and its nearest pixel lies in
/// the image. `image` overrides the calibration's image size; one of the two
/// must be present.
std::vector<PixelProjection> project_to_image(const PointCloud& cloud, const Calibration& calib,
                                              std::optional<ImageSize> image = std::nullopt);

/// Class id at the nearest pixel (round half up) for in-view points.
std::vector<std::optional<int>> paint_semantics(const PointCloud& cloud, const SemanticMap& map,
                                                const Calibration& calib);

struct VoxelizeOptions {
    int num_classes = 19;
    /// Semantic mode: occupied cells with no labeled point get 1 instead of 0.
    bool unlabeled_as_occupied = false;
};

/// Bins the cloud into `spec`. `labels` is only read in semantic mode and
/// must then have one entry per point. Output is independent of point order.
VoxelGrid voxelize(const PointCloud& cloud, std::span<const std::optional<int>> labels,
                   const GridSpec& spec, FeatureMode mode, const VoxelizeOptions& options = {});

// SVXL container: 32-byte header followed by little-endian float32 values.
//   0  char[4] "SVXL"
//   4  u32     version (1)
//   8  u32[3]  dims x, y, z
//  20  u8      mode (0 occupancy, 1 intensity, 2 semantic)
//  21  u8[11]  zero padding
// The ROI is not stored; readers get the default GridSpec ROI.
inline constexpr std::uint32_t kSvxlVersion = 1;
inline constexpr std::size_t kSvxlHeaderSize = 32;

std::string encode_svxl(const VoxelGrid& grid);
/// Throws FormatError with a byte offset on malformed input.
VoxelGrid decode_svxl(std::string_view bytes);

}  // namespace boxtrack
