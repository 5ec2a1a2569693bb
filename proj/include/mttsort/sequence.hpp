#pragma once

#include <string>
#include <vector>

#include "mttsort/core.hpp"
#include "mttsort/metrics.hpp"

namespace mttsort {

/// Metadata plus contents of one sequence (sub-scene).
struct Sequence {
    std::string name;
    int frame_count = 0;
    int width = 0;
    int height = 0;
    int embedding_dim = 0;
    std::vector<Detection> detections;  ///< sorted by frame
    std::vector<GtEntry> gt;            ///< empty when no ground truth is available
};

}  // namespace mttsort
