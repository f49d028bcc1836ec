#include "boxtrack/evaluation.hpp"

#include "boxtrack/errors.hpp"
#include "boxtrack/hungarian.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>

namespace boxtrack {

std::string_view to_string(Matcher m) { return m == Matcher::iou ? "iou" : "srts"; }

Matcher matcher_from_string(std::string_view name) {
    if (name == "iou") return Matcher::iou;
    if (name == "srts") return Matcher::srts;
    throw ConfigError("unknown matcher: " + std::string(name));
}

double MatchCriterion::similarity(const OrientedBox3D& truth, const OrientedBox3D& candidate) const {
    return matcher == Matcher::iou ? rotated_iou_3d(truth, candidate) : boxtrack::srts(truth, candidate, srts);
}

namespace {

constexpr double kMostlyTracked = 0.8;
constexpr double kMostlyLost = 0.2;

struct Candidate {
    const AnnotatedObject* object;
    long long id;
};

std::vector<Candidate> evaluable(const FrameAnnotations& frame, long long& synthetic_id) {
    std::vector<Candidate> out;
    for (const auto& obj : frame.objects) {
        if (!obj.evaluable) continue;
        const long long id =
            (obj.track_id && *obj.track_id >= 0) ? *obj.track_id : --synthetic_id;
        out.push_back({&obj, id});
    }
    return out;
}

}  // namespace

MotReport clear_mot(const std::vector<FrameAnnotations>& gt, const std::vector<FrameAnnotations>& hyp,
                    const MatchCriterion& criterion) {
    if (gt.size() != hyp.size()) throw InputError("gt and hyp sequences differ in length");
    for (std::size_t f = 0; f < gt.size(); ++f) {
        if (gt[f].frame != hyp[f].frame) throw InputError("gt and hyp frame indices are misaligned");
    }
    if (criterion.matcher == Matcher::srts) criterion.srts.validate();

    MotReport report;
    std::map<long long, long long> previous;   // gt id -> hyp id matched in the previous frame
    std::map<long long, long long> last_match; // gt id -> most recent hyp id
    std::map<long long, std::pair<int, int>> coverage;  // gt id -> (frames present, frames matched)
    double similarity_sum = 0.0;
    long long gt_synthetic = 0;
    long long hyp_synthetic = 0;

    for (std::size_t f = 0; f < gt.size(); ++f) {
        const auto g = evaluable(gt[f], gt_synthetic);
        const auto h = evaluable(hyp[f], hyp_synthetic);
        report.gt_objects += static_cast<int>(g.size());
        for (const auto& c : g) ++coverage[c.id].first;

        std::vector<int> gt_match(g.size(), -1);
        std::vector<char> hyp_used(h.size(), 0);
        std::vector<double> match_sim(g.size(), 0.0);

        auto valid_similarity = [&](std::size_t gi, std::size_t hi) -> std::optional<double> {
            if (g[gi].object->cls != h[hi].object->cls) return std::nullopt;
            const double s = criterion.similarity(g[gi].object->box, h[hi].object->box);
            if (s < criterion.threshold) return std::nullopt;
            return s;
        };

        // Continue last frame's correspondences while they remain valid.
        for (std::size_t gi = 0; gi < g.size(); ++gi) {
            const auto prev = previous.find(g[gi].id);
            if (prev == previous.end()) continue;
            for (std::size_t hi = 0; hi < h.size(); ++hi) {
                if (hyp_used[hi] || h[hi].id != prev->second) continue;
                if (const auto s = valid_similarity(gi, hi)) {
                    gt_match[gi] = static_cast<int>(hi);
                    hyp_used[hi] = 1;
                    match_sim[gi] = *s;
                }
                break;
            }
        }

        // Assign the rest: invalid pairs cost more than any set of valid ones.
        std::vector<std::size_t> free_g, free_h;
        for (std::size_t gi = 0; gi < g.size(); ++gi) if (gt_match[gi] < 0) free_g.push_back(gi);
        for (std::size_t hi = 0; hi < h.size(); ++hi) if (!hyp_used[hi]) free_h.push_back(hi);
        if (!free_g.empty() && !free_h.empty()) {
            const double invalid = static_cast<double>(std::min(free_g.size(), free_h.size())) + 1.0;
            Eigen::MatrixXd cost(free_g.size(), free_h.size());
            Eigen::MatrixXd sim = Eigen::MatrixXd::Constant(free_g.size(), free_h.size(), -1.0);
            for (std::size_t a = 0; a < free_g.size(); ++a) {
                for (std::size_t b = 0; b < free_h.size(); ++b) {
                    const auto s = valid_similarity(free_g[a], free_h[b]);
                    cost(a, b) = s ? 1.0 - *s : invalid;
                    if (s) sim(a, b) = *s;
                }
            }
            const auto assignment = solve_assignment(cost);
            for (std::size_t a = 0; a < free_g.size(); ++a) {
                const int b = assignment[a];
                if (b < 0 || sim(a, b) < 0.0) continue;
                const std::size_t gi = free_g[a];
                const std::size_t hi = free_h[static_cast<std::size_t>(b)];
                gt_match[gi] = static_cast<int>(hi);
                hyp_used[hi] = 1;
                match_sim[gi] = sim(a, b);
                const auto last = last_match.find(g[gi].id);
                if (last != last_match.end() && last->second != h[hi].id) ++report.id_switches;
            }
        }

        previous.clear();
        for (std::size_t gi = 0; gi < g.size(); ++gi) {
            if (gt_match[gi] < 0) {
                ++report.misses;
                continue;
            }
            const long long hid = h[static_cast<std::size_t>(gt_match[gi])].id;
            previous[g[gi].id] = hid;
            last_match[g[gi].id] = hid;
            ++coverage[g[gi].id].second;
            ++report.matches;
            similarity_sum += match_sim[gi];
        }
        report.false_positives +=
            static_cast<int>(std::count(hyp_used.begin(), hyp_used.end(), char{0}));
    }

    report.gt_trajectories = static_cast<int>(coverage.size());
    if (report.gt_objects == 0 && report.false_positives == 0) {
        report.mota = 1.0;
        report.motp = 1.0;
        report.mostly_tracked = 1.0;
        report.mostly_lost = 0.0;
        return report;
    }
    const double errors = report.misses + report.false_positives + report.id_switches;
    report.mota = 1.0 - errors / std::max(report.gt_objects, 1);
    report.motp = report.matches > 0 ? similarity_sum / report.matches : 0.0;
    int mt = 0;
    int ml = 0;
    for (const auto& [id, cov] : coverage) {
        const double ratio = static_cast<double>(cov.second) / cov.first;
        if (ratio >= kMostlyTracked) ++mt;
        if (ratio <= kMostlyLost) ++ml;
    }
    if (!coverage.empty()) {
        report.mostly_tracked = static_cast<double>(mt) / static_cast<double>(coverage.size());
        report.mostly_lost = static_cast<double>(ml) / static_cast<double>(coverage.size());
    }
    return report;
}

std::vector<PrPoint> precision_recall(const std::vector<FrameAnnotations>& detections,
                                      const std::vector<FrameAnnotations>& gt,
                                      const MatchCriterion& criterion) {
    if (criterion.matcher == Matcher::srts) criterion.srts.validate();
    std::map<int, std::vector<const AnnotatedObject*>> truth_by_frame;
    std::size_t total_gt = 0;
    for (const auto& frame : gt) {
        for (const auto& obj : frame.objects) {
            if (!obj.evaluable) continue;
            truth_by_frame[frame.frame].push_back(&obj);
            ++total_gt;
        }
    }

    struct Det {
        int frame;
        const AnnotatedObject* object;
    };
    std::vector<Det> dets;
    for (const auto& frame : detections) {
        for (const auto& obj : frame.objects) {
            if (obj.evaluable) dets.push_back({frame.frame, &obj});
        }
    }
    std::stable_sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) {
        return a.object->score.value_or(0.0) > b.object->score.value_or(0.0);
    });

    std::map<int, std::vector<char>> taken;
    for (const auto& [frame, objs] : truth_by_frame) taken[frame].assign(objs.size(), 0);

    std::vector<PrPoint> curve;
    curve.reserve(dets.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < dets.size(); ++k) {
        const Det& d = dets[k];
        const auto it = truth_by_frame.find(d.frame);
        if (it != truth_by_frame.end()) {
            auto& used = taken[d.frame];
            int best = -1;
            double best_sim = -1.0;
            for (std::size_t t = 0; t < it->second.size(); ++t) {
                if (used[t] || it->second[t]->cls != d.object->cls) continue;
                const double s = criterion.similarity(it->second[t]->box, d.object->box);
                if (s >= criterion.threshold && s > best_sim) {
                    best_sim = s;
                    best = static_cast<int>(t);
                }
            }
            if (best >= 0) {
                used[static_cast<std::size_t>(best)] = 1;
                ++tp;
            }
        }
        PrPoint p;
        p.score = d.object->score.value_or(0.0);
        p.precision = static_cast<double>(tp) / static_cast<double>(k + 1);
        p.recall = total_gt > 0 ? static_cast<double>(tp) / static_cast<double>(total_gt) : 0.0;
        curve.push_back(p);
    }
    return curve;
}

double interpolated_ap40(const std::vector<PrPoint>& curve) {
    constexpr int kPoints = 40;
    // Suffix maximum of precision in rank order.
    std::vector<double> best(curve.size() + 1, 0.0);
    for (std::size_t k = curve.size(); k-- > 0;) best[k] = std::max(best[k + 1], curve[k].precision);
    double sum = 0.0;
    std::size_t k = 0;
    for (int i = 1; i <= kPoints; ++i) {
        const double r = static_cast<double>(i) / kPoints;
        // Recall is non-decreasing along the curve.
        while (k < curve.size() && curve[k].recall < r - 1e-12) ++k;
        sum += best[k];
    }
    return sum / kPoints;
}

double average_precision(const std::vector<FrameAnnotations>& detections,
                         const std::vector<FrameAnnotations>& gt, const MatchCriterion& criterion) {
    return interpolated_ap40(precision_recall(detections, gt, criterion));
}

int count_points_in_box(const OrientedBox3D& box, const PointCloud& cloud) {
    int count = 0;
    for (const auto& p : cloud.points) {
        if (box.contains(Eigen::Vector3d(p.x, p.y, p.z))) ++count;
    }
    return count;
}

FrameAnnotations point_count_filter(const FrameAnnotations& detections, const PointCloud& cloud,
                                    const PostFilterOptions& options) {
    FrameAnnotations out;
    out.frame = detections.frame;
    for (const auto& obj : detections.objects) {
        const bool sparse = count_points_in_box(obj.box, cloud) < options.min_points;
        const bool near = obj.box.center.norm() < options.max_range;
        const bool remove = options.require_both ? (sparse && near) : (sparse || near);
        if (!remove) out.objects.push_back(obj);
    }
    return out;
}

std::string format_mot_report(const MotReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "MOTA            %10.6f\n"
                  "MOTP            %10.6f\n"
                  "MT              %10.6f\n"
                  "ML              %10.6f\n"
                  "matches         %10d\n"
                  "false_positives %10d\n"
                  "misses          %10d\n"
                  "id_switches     %10d\n"
                  "gt_objects      %10d\n"
                  "gt_trajectories %10d\n",
                  r.mota, r.motp, r.mostly_tracked, r.mostly_lost, r.matches, r.false_positives,
                  r.misses, r.id_switches, r.gt_objects, r.gt_trajectories);
    return buf;
}

std::string format_pr_csv(const std::vector<PrPoint>& curve) {
    std::string out = "rank,score,precision,recall\n";
    char buf[128];
    for (std::size_t k = 0; k < curve.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f\n", k + 1, curve[k].score,
                      curve[k].precision, curve[k].recall);
        out += buf;
    }
    return out;
}

}  // namespace boxtrack
