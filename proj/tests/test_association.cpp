#include <gtest/gtest.h>

#include <random>

#include "mttsort/association.hpp"
#include "mttsort/feature_buffer.hpp"

using namespace mttsort;

namespace {

Embedding vec(std::initializer_list<double> v) {
    Embedding e(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) e[i++] = x;
    return e;
}

Track make_track(const KalmanModel& kf, const BoundingBox& box, const Embedding& feature, int tsu = 1,
                 std::size_t capacity = 5) {
    Track t;
    t.kalman = kf.initiate(box.to_center());
    t.state = TrackState::Confirmed;
    t.time_since_update = tsu;
    t.features = FeatureBuffer(capacity);
    t.features.push(feature);
    return t;
}

Detection make_det(const BoundingBox& box, const Embedding& e) { return {1, box, 0.9, e}; }

}  // namespace

TEST(FeatureBuffer, FifoEviction) {
    FeatureBuffer b(5);
    for (int i = 1; i <= 5; ++i) b.push(vec({double(i), 0}));
    b.push(vec({6, 0}));
    ASSERT_EQ(b.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(b.entries()[i][0], i + 2);

    FeatureBuffer e(5);
    e.push(vec({1, 0}));
    EXPECT_EQ(e.size(), 1u);

    FeatureBuffer seven(5);
    for (int i = 1; i <= 7; ++i) seven.push(vec({double(i)}));
    for (int i = 0; i < 5; ++i) EXPECT_EQ(seven.entries()[i][0], i + 3);
}

TEST(FeatureBuffer, DimensionMismatchAndEmpty) {
    FeatureBuffer b(3);
    EXPECT_THROW(b.pooled(), Error);
    b.push(vec({1, 0}));
    EXPECT_THROW(b.push(vec({1, 0, 0})), SchemaError);
    b.clear();
    EXPECT_TRUE(b.empty());
    EXPECT_THROW(FeatureBuffer(0), ConfigError);
}

TEST(FeatureBuffer, Pooling) {
    FeatureBuffer one(5);
    one.push(vec({1, 0}));
    EXPECT_EQ(one.pooled(), vec({1, 0}));

    FeatureBuffer two(5);
    two.push(vec({1, 0}));
    two.push(vec({0, 1}));
    EXPECT_NEAR(two.pooled()[0], 0.70710678, 1e-8);
    EXPECT_NEAR(two.pooled()[1], 0.70710678, 1e-8);

    FeatureBuffer anti(5);
    anti.push(vec({1, 0}));
    anti.push(vec({-1, 0}));
    EXPECT_EQ(anti.pooled(), vec({-1, 0}));
}

TEST(FeatureBuffer, PoolingIgnoresOrder) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 1);
    std::vector<Embedding> fs;
    for (int i = 0; i < 5; ++i) fs.push_back(normalized(vec({n(rng), n(rng), n(rng)})));
    FeatureBuffer a(5), b(5);
    for (int i = 0; i < 5; ++i) a.push(fs[i]);
    for (int i : {3, 0, 4, 2, 1}) b.push(fs[i]);
    EXPECT_LT((a.pooled() - b.pooled()).norm(), 1e-12);
}

TEST(Iou, Basics) {
    const BoundingBox a(0, 0, 2, 2), b(1, 1, 2, 2), far(10, 10, 1, 1);
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_DOUBLE_EQ(iou(a, far), 0.0);
    EXPECT_NEAR(iou(a, b), 1.0 / 7.0, 1e-15);
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    // Touching edges do not overlap.
    EXPECT_DOUBLE_EQ(iou(a, BoundingBox(2, 0, 2, 2)), 0.0);
}

TEST(IouCost, ThresholdRule) {
    const std::vector<BoundingBox> tracks{BoundingBox(0, 0, 10, 10)};
    const std::vector<BoundingBox> dets{BoundingBox(0, 0, 10, 10), BoundingBox(50, 50, 10, 10),
                                        BoundingBox(0, 0, 10, 5)};  // IoU 0.5
    const auto c = iou_cost(tracks, dets, 0.3);
    EXPECT_DOUBLE_EQ(c(0, 0), 0.0);
    EXPECT_EQ(c(0, 1), kInfeasible);
    EXPECT_EQ(c(0, 2), kInfeasible);
    const auto loose = iou_cost(tracks, dets, 0.7);
    EXPECT_DOUBLE_EQ(loose(0, 2), 0.5);
}

TEST(AppearanceCost, CosineValues) {
    KalmanModel kf;
    const BoundingBox box(100, 100, 50, 100);
    Track t = make_track(kf, box, vec({1, 0}));
    t.features.push(vec({0, 1}));
    const std::vector<const Track*> tracks{&t};
    const Detection same = make_det(box, normalized(vec({1, 1})));
    const Detection ortho = make_det(box, vec({0.70710678118654757, -0.70710678118654757}));
    const Detection x_axis = make_det(box, vec({1, 0}));
    const std::vector<const Detection*> dets{&same, &ortho, &x_axis};
    const auto c = appearance_cost(kf, tracks, dets, 2.0);
    EXPECT_NEAR(c(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(c(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(c(0, 2), 1.0 - std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(c(0, 2), 0.29289, 1e-5);

    const auto gated = appearance_cost(kf, tracks, dets, 0.2);
    EXPECT_EQ(gated(0, 1), kInfeasible);
    EXPECT_EQ(gated(0, 2), kInfeasible);
}

TEST(AppearanceCost, MahalanobisGateExcludesFarDetections) {
    KalmanModel kf;
    const BoundingBox box(100, 100, 50, 100);
    Track t = make_track(kf, box, vec({1, 0}));
    const std::vector<const Track*> tracks{&t};
    const Detection far = make_det(BoundingBox(900, 600, 50, 100), vec({1, 0}));
    const std::vector<const Detection*> dets{&far};
    EXPECT_EQ(appearance_cost(kf, tracks, dets, 1.0)(0, 0), kInfeasible);
}

TEST(AppearanceCost, BufferOfOneIsSingleFrameCosine) {
    KalmanModel kf;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    const BoundingBox box(100, 100, 50, 100);
    Track t = make_track(kf, box, normalized(vec({n(rng), n(rng), n(rng), n(rng)})), 1, 1);
    Embedding newest;
    for (int i = 0; i < 4; ++i) {
        newest = normalized(vec({n(rng), n(rng), n(rng), n(rng)}));
        t.features.push(newest);
    }
    const Detection d = make_det(box, normalized(vec({n(rng), n(rng), n(rng), n(rng)})));
    const std::vector<const Track*> tracks{&t};
    const std::vector<const Detection*> dets{&d};
    EXPECT_DOUBLE_EQ(appearance_cost(kf, tracks, dets, 2.0)(0, 0),
                     std::clamp(1.0 - newest.dot(d.embedding), 0.0, 2.0));
}

TEST(Cascade, MatchesUnambiguousPairs) {
    KalmanModel kf;
    TrackerConfig cfg;
    const BoundingBox b0(100, 100, 50, 100), b1(400, 100, 50, 100);
    std::vector<Track> tracks{make_track(kf, b0, vec({1, 0})), make_track(kf, b1, vec({0, 1}))};
    std::vector<Detection> dets{make_det(b1, vec({0, 1})), make_det(b0, vec({1, 0}))};
    const std::vector<int> ti{0, 1}, di{0, 1};
    const auto r = matching_cascade(kf, tracks, ti, dets, di, cfg);
    EXPECT_EQ(r.matches, (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
    EXPECT_TRUE(r.unmatched_tracks.empty());
    EXPECT_TRUE(r.unmatched_detections.empty());
}

TEST(Cascade, FresherTrackWins) {
    KalmanModel kf;
    TrackerConfig cfg;
    const BoundingBox b(100, 100, 50, 100);
    std::vector<Track> tracks{make_track(kf, b, vec({1, 0}), 5), make_track(kf, b, vec({1, 0}), 1)};
    std::vector<Detection> dets{make_det(b, vec({1, 0}))};
    const std::vector<int> ti{0, 1}, di{0};
    const auto r = matching_cascade(kf, tracks, ti, dets, di, cfg);
    EXPECT_EQ(r.matches, (std::vector<std::pair<int, int>>{{1, 0}}));
    EXPECT_EQ(r.unmatched_tracks, (std::vector<int>{0}));
}

TEST(Cascade, NoDetections) {
    KalmanModel kf;
    const BoundingBox b(100, 100, 50, 100);
    std::vector<Track> tracks{make_track(kf, b, vec({1, 0})), make_track(kf, b, vec({0, 1}), 3)};
    std::vector<Detection> dets;
    const std::vector<int> ti{0, 1}, di{};
    const auto r = matching_cascade(kf, tracks, ti, dets, di, TrackerConfig{});
    EXPECT_TRUE(r.matches.empty());
    EXPECT_EQ(r.unmatched_tracks, (std::vector<int>{0, 1}));
}
