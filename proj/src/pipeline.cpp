#include "boxtrack/pipeline.hpp"

#include "boxtrack/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

namespace boxtrack {

TrackingRun track_sequence(const std::vector<FrameAnnotations>& detections, const FilterConfig& config) {
    TrackingRun run;
    LmbFilter filter(config);
    std::map<TrackLabel, int> ids;
    for (const auto& frame : detections) {
        std::vector<Measurement> meas;
        for (const auto& obj : frame.objects) {
            if (!obj.evaluable) continue;
            meas.push_back(Measurement::from_box(obj.box, obj.cls, obj.score.value_or(1.0)));
        }
        const auto extracted = filter.step(meas);
        FrameAnnotations out;
        out.frame = frame.frame;
        for (const auto& t : extracted) {
            const auto [it, inserted] = ids.try_emplace(t.label, static_cast<int>(ids.size()));
            AnnotatedObject obj;
            obj.box = t.box();
            obj.cls = t.cls;
            obj.track_id = it->second;
            obj.score = t.existence;
            out.objects.push_back(std::move(obj));
        }
        run.tracks.push_back(std::move(out));
        double sum = 0.0;
        for (const auto& t : filter.tracks()) sum += t.existence;
        run.expected_cardinality.push_back(sum);
    }
    return run;
}

void align_sequences(std::vector<FrameAnnotations>& a, std::vector<FrameAnnotations>& b) {
    auto index = [](std::vector<FrameAnnotations>& seq, int n) {
        std::vector<FrameAnnotations> out(static_cast<std::size_t>(n));
        for (int f = 0; f < n; ++f) out[static_cast<std::size_t>(f)].frame = f;
        for (auto& frame : seq) {
            auto& dst = out[static_cast<std::size_t>(frame.frame)].objects;
            for (auto& obj : frame.objects) dst.push_back(std::move(obj));
        }
        seq = std::move(out);
    };
    int n = 0;
    for (const auto& f : a) n = std::max(n, f.frame + 1);
    for (const auto& f : b) n = std::max(n, f.frame + 1);
    index(a, n);
    index(b, n);
}

std::vector<BoxPair> random_box_pairs(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<BoxPair> pairs;
    pairs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const OrientedBox3D a({rng.uniform(0.0, 60.0), rng.uniform(-40.0, 40.0), rng.uniform(-1.5, -0.5)},
                              {rng.uniform(3.0, 5.0), rng.uniform(1.4, 2.1), rng.uniform(1.3, 1.9)},
                              rng.uniform(-std::numbers::pi, std::numbers::pi));
        const OrientedBox3D b(a.center + Eigen::Vector3d(rng.normal(0.0, 0.8), rng.normal(0.0, 0.8),
                                                         rng.normal(0.0, 0.2)),
                              a.size.cwiseProduct(Eigen::Vector3d(rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2),
                                                                  rng.uniform(0.8, 1.2))),
                              a.yaw + rng.normal(0.0, 0.4));
        pairs.push_back({a, b});
    }
    return pairs;
}

BenchResult benchmark_metrics(const std::vector<BoxPair>& pairs, const SrtsParams& params) {
    using clock = std::chrono::steady_clock;
    BenchResult result;
    result.pairs = pairs.size();
    if (pairs.empty()) return result;

    volatile double sink = 0.0;
    double srts_sum = 0.0;
    const auto t0 = clock::now();
    for (const auto& p : pairs) srts_sum += srts(p.a, p.b, params);
    const auto t1 = clock::now();
    double iou_sum = 0.0;
    for (const auto& p : pairs) iou_sum += rotated_iou_3d(p.a, p.b);
    const auto t2 = clock::now();
    sink = srts_sum + iou_sum;

    const double n = static_cast<double>(pairs.size());
    result.srts_ns = std::chrono::duration<double, std::nano>(t1 - t0).count() / n;
    result.iou_ns = std::chrono::duration<double, std::nano>(t2 - t1).count() / n;
    result.checksum = sink;
    return result;
}

std::string format_bench_csv(const BenchResult& r) {
    char buf[256];
    std::string out = "metric,pairs,mean_ns_per_pair\n";
    std::snprintf(buf, sizeof(buf), "srts,%zu,%.3f\niou,%zu,%.3f\n", r.pairs, r.srts_ns, r.pairs, r.iou_ns);
    out += buf;
    std::snprintf(buf, sizeof(buf), "iou_over_srts,%zu,%.6f\n", r.pairs, r.speedup());
    out += buf;
    return out;
}

}  // namespace boxtrack
