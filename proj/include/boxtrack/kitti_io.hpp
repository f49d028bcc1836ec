#pragma once

#include "boxtrack/annotations.hpp"
#include "boxtrack/calibration.hpp"
#include "boxtrack/voxelizer.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace boxtrack {

// ---- velodyne scans: little-endian float32 quadruples (x, y, z, intensity) ----

/// Throws FormatError with the byte offset of a trailing partial record.
PointCloud parse_velodyne(std::string_view bytes);
std::string encode_velodyne(const PointCloud& cloud);

// ---- label files ----

enum class LabelFlavor { object, tracking };

/// One whitespace-separated KITTI label line. Object files carry 15 fields,
/// tracking files prepend frame and track id (17); either may append a score.
struct LabelRecord {
    int frame = 0;
    int track_id = -1;
    std::string type;
    double truncated = 0.0;
    int occluded = 0;
    double alpha = 0.0;
    std::array<double, 4> bbox{};        // left, top, right, bottom (px)
    std::array<double, 3> dimensions{};  // height, width, length (m)
    std::array<double, 3> location{};    // bottom centre, rectified camera frame (m)
    double rotation_y = 0.0;
    std::optional<double> score;

    [[nodiscard]] bool is_dont_care() const { return type == "DontCare"; }
};

/// Throws FormatError with a 1-based line number. Blank lines are skipped.
std::vector<LabelRecord> parse_labels(std::string_view text, LabelFlavor flavor);

/// Canonical form: one record per line, integers bare, every real with six
/// decimals, single spaces, trailing newline.
std::string format_labels(std::span<const LabelRecord> records, LabelFlavor flavor);

/// Camera-frame label box to sensor-frame box: the bottom-centre location is
/// lifted by h/2, mapped through the inverse calibration, and the yaw becomes
/// camera_x_heading - rotation_y (i.e. -rotation_y - pi/2 for the usual axes).
OrientedBox3D label_to_sensor_box(const LabelRecord& record, const Calibration& calib);

/// Inverse of label_to_sensor_box; fills dimensions, location, rotation_y, alpha.
void sensor_box_to_label(const OrientedBox3D& box, const Calibration& calib, LabelRecord& record);

/// Groups records into frames 0..max(frame, min_frames - 1). Object-flavour
/// records all land in `object_frame`. DontCare records become non-evaluable
/// objects; negative track ids become empty ids.
std::vector<FrameAnnotations> labels_to_frames(std::span<const LabelRecord> records,
                                               const Calibration& calib, LabelFlavor flavor,
                                               int min_frames = 0, int object_frame = 0);

std::vector<LabelRecord> frames_to_labels(std::span<const FrameAnnotations> frames,
                                          const Calibration& calib);

// ---- calibration files ----

/// Reads P2, R0_rect (or R_rect) and Tr_velo_to_cam (or Tr_velo_cam), each
/// row-major, with or without a colon after the key. Other keys are ignored.
/// Throws FormatError naming a missing key and CalibrationError if the
/// rotation blocks are not orthonormal.
Calibration parse_calibration(std::string_view text);
std::string format_calibration(const Calibration& calib);

// ---- semantic class maps: 8-bit single-channel PNG ----

SemanticMap read_semantic_png(const std::filesystem::path& path, int num_classes);
void write_semantic_png(const std::filesystem::path& path, const SemanticMap& map);

// ---- files ----

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace boxtrack
