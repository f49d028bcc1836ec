#pragma once

#include "boxtrack/annotations.hpp"
#include "boxtrack/geometry.hpp"
#include "boxtrack/voxelizer.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace boxtrack {

enum class Matcher { iou, srts };

std::string_view to_string(Matcher m);
/// Throws ConfigError on an unknown name.
Matcher matcher_from_string(std::string_view name);

/// A box-pair similarity and the threshold a match must reach.
struct MatchCriterion {
    Matcher matcher = Matcher::iou;
    double threshold = 0.7;
    SrtsParams srts;

    /// `truth` is the reference box for the asymmetric SRTs scale term.
    [[nodiscard]] double similarity(const OrientedBox3D& truth, const OrientedBox3D& candidate) const;
};

/// CLEAR-MOT summary. MOTP is the mean similarity of matched pairs.
struct MotReport {
    double mota = 0.0;
    double motp = 0.0;
    double mostly_tracked = 0.0;
    double mostly_lost = 0.0;
    int false_positives = 0;
    int misses = 0;
    int id_switches = 0;
    int matches = 0;
    int gt_objects = 0;
    int gt_trajectories = 0;
};

/// CLEAR-MOT over frame-aligned sequences (same length, same frame indices).
/// Correspondences from the previous frame are kept while still above the
/// threshold; the remainder is assigned by maximum match count, then minimum
/// total cost 1 - similarity. Objects match only within their class;
/// non-evaluable objects are ignored. Hypotheses without a non-negative track
/// id are treated as one-frame identities.
/// MT: >= 80% of a trajectory's frames matched; ML: <= 20%.
/// With no ground truth and no hypotheses the report is perfect.
MotReport clear_mot(const std::vector<FrameAnnotations>& gt, const std::vector<FrameAnnotations>& hyp,
                    const MatchCriterion& criterion);

struct PrPoint {
    double score = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Precision/recall after each detection in descending score order. Detections
/// are matched greedily to the most similar unmatched truth in the same frame
/// and class. Frames are paired by their `frame` field.
std::vector<PrPoint> precision_recall(const std::vector<FrameAnnotations>& detections,
                                      const std::vector<FrameAnnotations>& gt,
                                      const MatchCriterion& criterion);

/// 40-point interpolated average precision at recalls 1/40 .. 1. Zero when
/// there is no ground truth or no detection.
double average_precision(const std::vector<FrameAnnotations>& detections,
                         const std::vector<FrameAnnotations>& gt, const MatchCriterion& criterion);
double interpolated_ap40(const std::vector<PrPoint>& curve);

struct PostFilterOptions {
    int min_points = 13;
    double max_range = 52.0;  // m, radial distance of the box centre
    /// Remove when both conditions hold (default) or when either holds.
    bool require_both = true;
};

/// Number of cloud points inside `box`.
int count_points_in_box(const OrientedBox3D& box, const PointCloud& cloud);

/// Drops detections with too few interior points near the sensor.
FrameAnnotations point_count_filter(const FrameAnnotations& detections, const PointCloud& cloud,
                                    const PostFilterOptions& options = {});

std::string format_mot_report(const MotReport& report);
std::string format_pr_csv(const std::vector<PrPoint>& curve);

}  // namespace boxtrack
