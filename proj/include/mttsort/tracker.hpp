#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mttsort/association.hpp"
#include "mttsort/config.hpp"
#include "mttsort/core.hpp"
#include "mttsort/kalman.hpp"
#include "mttsort/track.hpp"

namespace mttsort {

struct TrackRecord {
    int track_id = 0;
    BoundingBox box;
    double confidence = 0.0;

    friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

struct FrameResult {
    int frame = 0;
    std::vector<TrackRecord> records;  ///< sorted by track id

    friend bool operator==(const FrameResult&, const FrameResult&) = default;
};

/// Confidence threshold followed by greedy IoU suppression. Survivors keep
/// their input order.
inline std::vector<Detection> preprocess(std::span<const Detection> detections,
                                         const TrackerConfig& config) {
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        if (detections[i].confidence >= config.min_confidence) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return detections[a].confidence > detections[b].confidence;
    });
    std::vector<int> kept;
    for (int i : order) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](int k) {
            return iou(detections[i].box, detections[k].box) > config.nms_max_overlap;
        });
        if (!suppressed) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<Detection> out;
    out.reserve(kept.size());
    for (int i : kept) out.push_back(detections[i]);
    return out;
}

/**
 * Online multi-object tracker. Each call to step() consumes one frame:
 *
 *   1. confidence filtering and NMS;
 *   2. Kalman prediction of every live track;
 *   3. appearance cascade over confirmed tracks (pooled buffer feature,
 *      Mahalanobis-gated);
 *   4. IoU matching of tentative tracks and confirmed tracks missed for
 *      exactly one frame against the leftover detections;
 *   5. updates, lifecycle transitions, deletion, and new-track creation.
 *
 * Confirmed tracks are reported while they are at most one frame stale.
 */
class Tracker {
public:
    explicit Tracker(TrackerConfig config, KalmanModel kf = KalmanModel{})
        : config_(config), kf_(kf) {
        validate(config_);
    }

    const TrackerConfig& config() const { return config_; }
    const std::vector<Track>& tracks() const { return tracks_; }
    int last_frame() const { return last_frame_; }

    FrameResult step(int frame, std::span<const Detection> frame_detections) {
        if (frame <= last_frame_) {
            throw SequenceError("frame " + std::to_string(frame) + " presented after frame " +
                                std::to_string(last_frame_));
        }
        last_frame_ = frame;
        const std::vector<Detection> detections = preprocess(frame_detections, config_);

        for (auto& t : tracks_) {
            t.kalman = kf_.predict(t.kalman);
            t.age += 1;
            t.time_since_update += 1;
        }

        std::vector<int> confirmed, unconfirmed;
        for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) {
            (tracks_[i].is_confirmed() ? confirmed : unconfirmed).push_back(i);
        }
        std::vector<int> all_dets(detections.size());
        std::iota(all_dets.begin(), all_dets.end(), 0);

        auto cascade = matching_cascade(kf_, tracks_, confirmed, detections, all_dets, config_);

        std::vector<int> iou_candidates = unconfirmed;
        std::vector<int> still_unmatched;
        for (int t : cascade.unmatched_tracks) {
            (tracks_[t].time_since_update == 1 ? iou_candidates : still_unmatched).push_back(t);
        }
        std::sort(iou_candidates.begin(), iou_candidates.end());

        std::vector<BoundingBox> track_boxes, det_boxes;
        for (int t : iou_candidates) track_boxes.push_back(tracks_[t].box());
        for (int d : cascade.unmatched_detections) det_boxes.push_back(detections[d].box);
        const auto iou_result =
            solve_assignment(iou_cost(track_boxes, det_boxes, config_.max_iou_distance));

        std::vector<std::pair<int, int>> matches = cascade.matches;
        for (auto [i, j] : iou_result.matches) {
            matches.emplace_back(iou_candidates[i], cascade.unmatched_detections[j]);
        }
        std::vector<int> unmatched_tracks = still_unmatched;
        for (int i : iou_result.unmatched_tracks) unmatched_tracks.push_back(iou_candidates[i]);
        std::vector<int> unmatched_dets;
        for (int j : iou_result.unmatched_detections) {
            unmatched_dets.push_back(cascade.unmatched_detections[j]);
        }

        for (auto [t, d] : matches) apply_match(tracks_[t], detections[d]);
        for (int t : unmatched_tracks) {
            auto& track = tracks_[t];
            if (track.is_tentative() || track.time_since_update > config_.max_age) {
                track.mark_deleted();
            }
        }
        std::erase_if(tracks_, [](const Track& t) { return t.is_deleted(); });

        std::sort(unmatched_dets.begin(), unmatched_dets.end());
        for (int d : unmatched_dets) initiate(detections[d]);

        FrameResult result{frame, {}};
        for (const auto& t : tracks_) {
            if (t.is_confirmed() && t.time_since_update <= 1) {
                result.records.push_back({t.id, t.box(), t.confidence});
            }
        }
        std::sort(result.records.begin(), result.records.end(),
                  [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
        return result;
    }

private:
    void apply_match(Track& track, const Detection& det) {
        try {
            track.kalman = kf_.update(track.kalman, det.box.to_center());
        } catch (const NumericalError&) {
            // Keep the predicted state for this frame.
        }
        track.features.push(det.embedding);
        track.confidence = det.confidence;
        track.hits += 1;
        track.time_since_update = 0;
        if (track.is_tentative() && track.hits >= config_.n_init) {
            track.state = TrackState::Confirmed;
        }
    }

    void initiate(const Detection& det) {
        Track t{.id = next_id_++,
                .kalman = kf_.initiate(det.box.to_center()),
                .state = TrackState::Tentative,
                .hits = 1,
                .time_since_update = 0,
                .age = 1,
                .confidence = det.confidence,
                .features = FeatureBuffer(static_cast<std::size_t>(config_.feature_buffer_size))};
        t.features.push(det.embedding);
        if (t.hits >= config_.n_init) t.state = TrackState::Confirmed;
        tracks_.push_back(std::move(t));
    }

    TrackerConfig config_;
    KalmanModel kf_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    int last_frame_ = 0;
};

/// Runs a fresh tracker over every frame from 1 to the last frame, where the
/// last frame is `frame_count` if given and otherwise the last detection's
/// frame. `detections` must be sorted by frame.
inline std::vector<FrameResult> run_sequence(std::span<const Detection> detections,
                                             const TrackerConfig& config,
                                             std::optional<int> frame_count = std::nullopt) {
    int last = frame_count.value_or(0);
    for (const auto& d : detections) {
        if (d.frame < 1) throw SequenceError("detection frame index must be >= 1");
        last = std::max(last, d.frame);
    }
    for (std::size_t i = 1; i < detections.size(); ++i) {
        if (detections[i].frame < detections[i - 1].frame) {
            throw SequenceError("detections are not sorted by frame");
        }
    }
    Tracker tracker(config);
    std::vector<FrameResult> results;
    std::size_t pos = 0;
    for (int frame = 1; frame <= last; ++frame) {
        const std::size_t begin = pos;
        while (pos < detections.size() && detections[pos].frame == frame) ++pos;
        results.push_back(tracker.step(frame, detections.subspan(begin, pos - begin)));
    }
    return results;
}

}  // namespace mttsort
