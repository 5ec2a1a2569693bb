#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mttsort/assignment.hpp"
#include "mttsort/config.hpp"
#include "mttsort/core.hpp"
#include "mttsort/kalman.hpp"
#include "mttsort/track.hpp"

namespace mttsort {

/// Rows are tracks, columns are detections. Entries equal to kInfeasible are
/// never matched.
using CostMatrix = Eigen::MatrixXd;

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

struct MatchResult {
    std::vector<std::pair<int, int>> matches;  ///< (row / track index, column / detection index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
};

/// Maximum number of feasible matches, then minimum total cost; remaining ties
/// prefer the lowest track index paired with the lowest detection index.
inline MatchResult solve_assignment(const CostMatrix& costs) {
    const int rows = static_cast<int>(costs.rows());
    const int cols = static_cast<int>(costs.cols());
    const auto col_of_row = max_matching_min_cost<double>(
        rows, cols, [&](int i, int j) { return costs(i, j) != kInfeasible; },
        [&](int i, int j) { return costs(i, j); });
    MatchResult r;
    std::vector<char> col_used(cols, 0);
    for (int i = 0; i < rows; ++i) {
        if (col_of_row[i] >= 0) {
            r.matches.emplace_back(i, col_of_row[i]);
            col_used[col_of_row[i]] = 1;
        } else {
            r.unmatched_tracks.push_back(i);
        }
    }
    for (int j = 0; j < cols; ++j) {
        if (!col_used[j]) r.unmatched_detections.push_back(j);
    }
    return r;
}

/// Cosine cost between each track's pooled buffer feature and each detection
/// embedding, gated by `max_dist` and by the Mahalanobis distance of the
/// detection to the track's predicted state.
inline CostMatrix appearance_cost(const KalmanModel& kf, std::span<const Track* const> tracks,
                                  std::span<const Detection* const> detections, double max_dist) {
    CostMatrix cost(tracks.size(), detections.size());
    std::vector<MeasurementVector> measurements;
    measurements.reserve(detections.size());
    for (const auto* d : detections) measurements.push_back(d->box.to_center());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const Embedding pooled = tracks[i]->features.pooled();
        std::vector<double> gate;
        try {
            gate = kf.gating_distance(tracks[i]->kalman, measurements);
        } catch (const NumericalError&) {
            gate.assign(detections.size(), kInfeasible);
        }
        for (std::size_t j = 0; j < detections.size(); ++j) {
            double c = std::clamp(1.0 - pooled.dot(detections[j]->embedding), 0.0, 2.0);
            if (c > max_dist || gate[j] > kChi2Gate4) c = kInfeasible;
            cost(i, j) = c;
        }
    }
    return cost;
}

/// 1 - IoU between each track's predicted box and each detection box;
/// entries above `max_iou_distance` are infeasible.
inline CostMatrix iou_cost(std::span<const BoundingBox> track_boxes,
                           std::span<const BoundingBox> detection_boxes, double max_iou_distance) {
    CostMatrix cost(track_boxes.size(), detection_boxes.size());
    for (std::size_t i = 0; i < track_boxes.size(); ++i) {
        for (std::size_t j = 0; j < detection_boxes.size(); ++j) {
            const double c = 1.0 - iou(track_boxes[i], detection_boxes[j]);
            cost(i, j) = c > max_iou_distance ? kInfeasible : c;
        }
    }
    return cost;
}

/// Association result expressed in the caller's track / detection indices.
struct IndexedMatches {
    std::vector<std::pair<int, int>> matches;
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
};

/**
 * Appearance matching in order of recency: tracks updated one frame ago are
 * matched first, then two frames ago, and so on up to `max_age`. Detections
 * claimed at one depth are unavailable to staler tracks.
 */
inline IndexedMatches matching_cascade(const KalmanModel& kf, std::span<const Track> tracks,
                                       std::span<const int> track_indices,
                                       std::span<const Detection> detections,
                                       std::span<const int> detection_indices,
                                       const TrackerConfig& config) {
    IndexedMatches out;
    std::vector<int> remaining(detection_indices.begin(), detection_indices.end());
    for (int depth = 0; depth < config.max_age && !remaining.empty(); ++depth) {
        std::vector<int> level;
        for (int t : track_indices) {
            if (tracks[t].time_since_update == depth + 1) level.push_back(t);
        }
        if (level.empty()) continue;
        std::vector<const Track*> level_tracks;
        for (int t : level) level_tracks.push_back(&tracks[t]);
        std::vector<const Detection*> level_dets;
        for (int d : remaining) level_dets.push_back(&detections[d]);
        const auto r =
            solve_assignment(appearance_cost(kf, level_tracks, level_dets, config.max_dist));
        std::vector<char> taken(remaining.size(), 0);
        for (auto [i, j] : r.matches) {
            out.matches.emplace_back(level[i], remaining[j]);
            taken[j] = 1;
        }
        std::vector<int> next;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            if (!taken[j]) next.push_back(remaining[j]);
        }
        remaining = std::move(next);
    }
    for (int t : track_indices) {
        const bool matched = std::any_of(out.matches.begin(), out.matches.end(),
                                         [t](const auto& m) { return m.first == t; });
        if (!matched) out.unmatched_tracks.push_back(t);
    }
    out.unmatched_detections = std::move(remaining);
    return out;
}

}  // namespace mttsort
