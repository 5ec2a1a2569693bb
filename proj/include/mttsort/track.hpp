#pragma once

#include <algorithm>

#include "mttsort/core.hpp"
#include "mttsort/feature_buffer.hpp"
#include "mttsort/kalman.hpp"

namespace mttsort {

/// One hypothesized trajectory. Owned by a single Tracker.
struct Track {
    int id = 0;
    GaussianState kalman;
    TrackState state = TrackState::Tentative;
    int hits = 1;
    int time_since_update = 0;
    int age = 1;
    double confidence = 0.0;  ///< confidence of the last associated detection
    FeatureBuffer features;

    bool is_tentative() const { return state == TrackState::Tentative; }
    bool is_confirmed() const { return state == TrackState::Confirmed; }
    bool is_deleted() const { return state == TrackState::Deleted; }

    /// Current Kalman estimate as a box. Degenerate sizes are clamped so the
    /// result is always a valid BoundingBox.
    BoundingBox box() const {
        constexpr double kMinSide = 1e-3;
        const double h = std::max(kalman.mean[3], kMinSide);
        const double w = std::max(kalman.mean[2] * kalman.mean[3], kMinSide);
        return {kalman.mean[0] - w / 2.0, kalman.mean[1] - h / 2.0, w, h};
    }

    void mark_deleted() {
        state = TrackState::Deleted;
        features.clear();
    }
};

}  // namespace mttsort
