#pragma once

#include "boxtrack/annotations.hpp"
#include "boxtrack/geometry.hpp"
#include "boxtrack/lmb.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace boxtrack {

struct TrackingRun {
    /// Extracted tracks per frame; track ids are assigned 0, 1, ... in order of
    /// first extraction. Scores carry the existence probability.
    std::vector<FrameAnnotations> tracks;
    /// Sum of existence probabilities over the filter's tracks after each step.
    std::vector<double> expected_cardinality;
};

/// Runs an LmbFilter over the frame sequence. Non-evaluable detections are ignored.
TrackingRun track_sequence(const std::vector<FrameAnnotations>& detections, const FilterConfig& config);

/// Pads both sequences with empty frames so they cover the same frame range.
void align_sequences(std::vector<FrameAnnotations>& a, std::vector<FrameAnnotations>& b);

struct BoxPair {
    OrientedBox3D a;
    OrientedBox3D b;
};

/// Seeded car-sized boxes; the second box of each pair is a perturbed copy of
/// the first so that most pairs overlap.
std::vector<BoxPair> random_box_pairs(std::size_t count, std::uint64_t seed);

struct BenchResult {
    std::size_t pairs = 0;
    double srts_ns = 0.0;  // mean per pair
    double iou_ns = 0.0;
    double checksum = 0.0;

    [[nodiscard]] double speedup() const { return srts_ns > 0.0 ? iou_ns / srts_ns : 0.0; }
};

/// Times srts and rotated_iou_3d over the same pairs.
BenchResult benchmark_metrics(const std::vector<BoxPair>& pairs, const SrtsParams& params = {});
std::string format_bench_csv(const BenchResult& result);

}  // namespace boxtrack
