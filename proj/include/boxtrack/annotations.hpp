#pragma once

#include "boxtrack/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace boxtrack {

/// One labelled box in the sensor frame: ground truth, a detection, or a track.
struct AnnotatedObject {
    OrientedBox3D box;
    std::string cls;
    std::optional<int> track_id;
    std::optional<double> score;
    /// False for DontCare-style records that take no part in evaluation.
    bool evaluable = true;
};

struct FrameAnnotations {
    int frame = 0;
    std::vector<AnnotatedObject> objects;
};

}  // namespace boxtrack
