#include "boxtrack/kitti_io.hpp"

#include "boxtrack/binary.hpp"
#include "boxtrack/errors.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace boxtrack {

namespace {

constexpr std::size_t kVelodyneRecord = 16;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double to_real(std::string_view token, std::size_t line, const char* what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
        throw FormatError(std::string("invalid number for ") + what + ": '" + std::string(token) + "'",
                          line);
    }
    return value;
}

int to_int(std::string_view token, std::size_t line, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw FormatError(std::string("invalid integer for ") + what + ": '" + std::string(token) + "'",
                          line);
    }
    return value;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        fn(text.substr(pos, end - pos), ++line_no);
        pos = end + 1;
    }
}

void append_real(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out += buf;
}

}  // namespace

PointCloud parse_velodyne(std::string_view bytes) {
    const std::size_t whole = bytes.size() / kVelodyneRecord;
    if (bytes.size() % kVelodyneRecord != 0) {
        throw FormatError("trailing partial point record", FormatError::npos, whole * kVelodyneRecord);
    }
    PointCloud cloud;
    cloud.points.resize(whole);
    for (std::size_t i = 0; i < whole; ++i) {
        const std::size_t o = i * kVelodyneRecord;
        cloud.points[i] = {binary::get_f32(bytes, o), binary::get_f32(bytes, o + 4),
                           binary::get_f32(bytes, o + 8), binary::get_f32(bytes, o + 12)};
    }
    return cloud;
}

std::string encode_velodyne(const PointCloud& cloud) {
    std::string out;
    out.reserve(cloud.size() * kVelodyneRecord);
    for (const auto& p : cloud.points) {
        binary::put_f32(out, p.x);
        binary::put_f32(out, p.y);
        binary::put_f32(out, p.z);
        binary::put_f32(out, p.intensity);
    }
    return out;
}

std::vector<LabelRecord> parse_labels(std::string_view text, LabelFlavor flavor) {
    const std::size_t base = flavor == LabelFlavor::tracking ? 17 : 15;
    std::vector<LabelRecord> records;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const auto f = split_fields(line);
        if (f.empty()) return;
        if (f.size() != base && f.size() != base + 1) {
            throw FormatError("expected " + std::to_string(base) + " or " + std::to_string(base + 1) +
                                  " fields, found " + std::to_string(f.size()),
                              line_no);
        }
        LabelRecord r;
        std::size_t k = 0;
        if (flavor == LabelFlavor::tracking) {
            r.frame = to_int(f[k++], line_no, "frame");
            r.track_id = to_int(f[k++], line_no, "track_id");
            if (r.frame < 0) throw FormatError("negative frame index", line_no);
        }
        r.type = std::string(f[k++]);
        r.truncated = to_real(f[k++], line_no, "truncated");
        r.occluded = to_int(f[k++], line_no, "occluded");
        r.alpha = to_real(f[k++], line_no, "alpha");
        for (double& v : r.bbox) v = to_real(f[k++], line_no, "bbox");
        for (double& v : r.dimensions) v = to_real(f[k++], line_no, "dimensions");
        for (double& v : r.location) v = to_real(f[k++], line_no, "location");
        r.rotation_y = to_real(f[k++], line_no, "rotation_y");
        if (k < f.size()) r.score = to_real(f[k++], line_no, "score");
        records.push_back(std::move(r));
    });
    return records;
}

std::string format_labels(std::span<const LabelRecord> records, LabelFlavor flavor) {
    std::string out;
    for (const auto& r : records) {
        if (flavor == LabelFlavor::tracking) {
            out += std::to_string(r.frame) + ' ' + std::to_string(r.track_id) + ' ';
        }
        out += r.type;
        out += ' ';
        append_real(out, r.truncated);
        out += ' ' + std::to_string(r.occluded) + ' ';
        append_real(out, r.alpha);
        for (double v : r.bbox) { out += ' '; append_real(out, v); }
        for (double v : r.dimensions) { out += ' '; append_real(out, v); }
        for (double v : r.location) { out += ' '; append_real(out, v); }
        out += ' ';
        append_real(out, r.rotation_y);
        if (r.score) { out += ' '; append_real(out, *r.score); }
        out += '\n';
    }
    return out;
}

OrientedBox3D label_to_sensor_box(const LabelRecord& r, const Calibration& calib) {
    const double h = r.dimensions[0];
    const Eigen::Vector3d center_rect(r.location[0], r.location[1] - h / 2.0, r.location[2]);
    const Eigen::Vector3d size(r.dimensions[2], r.dimensions[1], h);
    return {calib.rect_to_lidar(center_rect), size, calib.camera_x_heading() - r.rotation_y};
}

void sensor_box_to_label(const OrientedBox3D& box, const Calibration& calib, LabelRecord& r) {
    const double h = box.size.z();
    const Eigen::Vector3d center_rect = calib.lidar_to_rect(box.center);
    r.dimensions = {h, box.size.y(), box.size.x()};
    r.location = {center_rect.x(), center_rect.y() + h / 2.0, center_rect.z()};
    r.rotation_y = wrap_angle(calib.camera_x_heading() - box.yaw);
    r.alpha = wrap_angle(r.rotation_y - std::atan2(r.location[0], r.location[2]));
}

std::vector<FrameAnnotations> labels_to_frames(std::span<const LabelRecord> records,
                                               const Calibration& calib, LabelFlavor flavor,
                                               int min_frames, int object_frame) {
    int frame_count = std::max(min_frames, 0);
    for (const auto& r : records) {
        const int f = flavor == LabelFlavor::tracking ? r.frame : object_frame;
        frame_count = std::max(frame_count, f + 1);
    }
    std::vector<FrameAnnotations> frames(static_cast<std::size_t>(frame_count));
    for (int f = 0; f < frame_count; ++f) frames[static_cast<std::size_t>(f)].frame = f;
    for (const auto& r : records) {
        const int f = flavor == LabelFlavor::tracking ? r.frame : object_frame;
        AnnotatedObject obj;
        obj.cls = r.type;
        obj.evaluable = !r.is_dont_care();
        if (obj.evaluable) {
            obj.box = label_to_sensor_box(r, calib);
            validate(obj.box);
        }
        if (flavor == LabelFlavor::tracking && r.track_id >= 0) obj.track_id = r.track_id;
        obj.score = r.score;
        frames[static_cast<std::size_t>(f)].objects.push_back(std::move(obj));
    }
    return frames;
}

std::vector<LabelRecord> frames_to_labels(std::span<const FrameAnnotations> frames,
                                          const Calibration& calib) {
    std::vector<LabelRecord> out;
    for (const auto& frame : frames) {
        for (const auto& obj : frame.objects) {
            LabelRecord r;
            r.frame = frame.frame;
            r.track_id = obj.track_id.value_or(-1);
            r.type = obj.cls;
            r.score = obj.score;
            sensor_box_to_label(obj.box, calib, r);
            out.push_back(std::move(r));
        }
    }
    return out;
}

Calibration parse_calibration(std::string_view text) {
    struct Entry {
        const char* canonical;
        const char* alias;
        std::size_t count;
        std::vector<double> values;
    };
    std::array<Entry, 3> entries{{{"P2", "P2", 12, {}},
                                  {"R0_rect", "R_rect", 9, {}},
                                  {"Tr_velo_to_cam", "Tr_velo_cam", 12, {}}}};
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        auto f = split_fields(line);
        if (f.empty()) return;
        std::string_view key = f[0];
        if (!key.empty() && key.back() == ':') key.remove_suffix(1);
        for (auto& e : entries) {
            if (key != e.canonical && key != e.alias) continue;
            if (f.size() - 1 != e.count) {
                throw FormatError(std::string(e.canonical) + " expects " + std::to_string(e.count) +
                                      " values",
                                  line_no);
            }
            e.values.clear();
            for (std::size_t k = 1; k < f.size(); ++k) e.values.push_back(to_real(f[k], line_no, e.canonical));
        }
    });
    for (const auto& e : entries) {
        if (e.values.empty()) throw FormatError(std::string("missing key ") + e.canonical, FormatError::npos);
    }
    Calibration c;
    for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 4; ++k) c.projection(r, k) = entries[0].values[static_cast<std::size_t>(r * 4 + k)];
        for (int k = 0; k < 3; ++k) c.rectification(r, k) = entries[1].values[static_cast<std::size_t>(r * 3 + k)];
        for (int k = 0; k < 4; ++k) c.lidar_to_cam(r, k) = entries[2].values[static_cast<std::size_t>(r * 4 + k)];
    }
    c.validate();
    return c;
}

std::string format_calibration(const Calibration& calib) {
    std::string out;
    char buf[64];
    auto row = [&](const char* key, const auto& m) {
        out += key;
        out += ':';
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                std::snprintf(buf, sizeof(buf), " %.12e", m(r, k));
                out += buf;
            }
        }
        out += '\n';
    };
    row("P2", calib.projection);
    row("R0_rect", calib.rectification);
    row("Tr_velo_to_cam", calib.lidar_to_cam);
    return out;
}

SemanticMap read_semantic_png(const std::filesystem::path& path, int num_classes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw InputError("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    SemanticMap map;
    map.width = static_cast<int>(image.width);
    map.height = static_cast<int>(image.height);
    map.num_classes = num_classes;
    map.class_ids.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, map.class_ids.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw InputError("cannot decode PNG " + path.string() + ": " + msg);
    }
    map.validate();
    return map;
}

void write_semantic_png(const std::filesystem::path& path, const SemanticMap& map) {
    map.validate();
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(map.width);
    image.height = static_cast<png_uint_32>(map.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, map.class_ids.data(), 0, nullptr)) {
        throw InputError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace boxtrack
