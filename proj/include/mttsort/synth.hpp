#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mttsort/config.hpp"
#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"
#include "mttsort/metrics.hpp"
#include "mttsort/sequence.hpp"

namespace mttsort {

struct Occlusion {
    int identity = 0;
    int start_frame = 0;  ///< inclusive
    int end_frame = 0;    ///< inclusive

    friend bool operator==(const Occlusion&, const Occlusion&) = default;
};

struct ScenarioSpec {
    std::string name = "custom";
    int identities = 3;
    int frames = 300;
    double arena_width = 1280.0;
    double arena_height = 720.0;
    double motion_noise_sigma = 0.0;     ///< pixel jitter applied to detection boxes
    double miss_rate = 0.0;
    double false_positive_rate = 0.0;    ///< expected false boxes per frame
    int embedding_dim = 32;
    double embedding_noise_sigma = 0.0;
    std::vector<Occlusion> occlusions;
    std::uint64_t seed = 1;
    double acceleration_sigma = 0.3;     ///< pixels / frame^2
    double velocity_persistence = 0.95;  ///< per-frame velocity decay toward zero
    double max_speed_fraction = 0.05;    ///< of arena width, per frame
    double box_height = 120.0;           ///< mean subject height in pixels

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline void validate(const ScenarioSpec& s) {
    auto fail = [](const std::string& m) { throw ConfigError("scenario: " + m); };
    if (s.identities < 1) fail("identities must be >= 1");
    if (s.frames < 1) fail("frames must be >= 1");
    if (!(s.arena_width > 0.0) || !(s.arena_height > 0.0)) fail("arena must have positive size");
    if (!(s.box_height > 0.0) || s.box_height * 1.2 >= s.arena_height || s.box_height >= s.arena_width) {
        fail("box_height must be positive and fit inside the arena");
    }
    if (!(s.motion_noise_sigma >= 0.0) || !(s.embedding_noise_sigma >= 0.0) || !(s.acceleration_sigma >= 0.0)) {
        fail("noise levels must be >= 0");
    }
    if (!(s.miss_rate >= 0.0 && s.miss_rate <= 1.0)) fail("miss_rate must be in [0, 1]");
    if (!(s.false_positive_rate >= 0.0 && s.false_positive_rate <= 1.0)) fail("false_positive_rate must be in [0, 1]");
    if (!(s.velocity_persistence >= 0.0 && s.velocity_persistence < 1.0)) fail("velocity_persistence must be in [0, 1)");
    if (!(s.max_speed_fraction > 0.0 && s.max_speed_fraction <= 1.0)) fail("max_speed_fraction must be in (0, 1]");
    if (s.embedding_dim < 1) fail("embedding_dim must be >= 1");
    if (s.identities > s.embedding_dim) fail("identities exceed embedding_dim; anchors cannot be near-orthogonal");
    for (const auto& o : s.occlusions) {
        if (o.identity < 1 || o.identity > s.identities) fail("occlusion identity out of range");
        if (o.start_frame < 1 || o.end_frame > s.frames || o.start_frame > o.end_frame) {
            fail("occlusion interval must lie within [1, frames]");
        }
    }
}

namespace detail {

inline double round_to_grid(double v) { return std::round(v * 100.0) / 100.0; }

/// Orthonormalized Gaussian vectors, one per identity.
inline std::vector<Embedding> make_anchors(int k, int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Embedding> anchors;
    while (static_cast<int>(anchors.size()) < k) {
        Embedding v(dim);
        for (int i = 0; i < dim; ++i) v[i] = n(rng);
        for (const auto& a : anchors) v -= a.dot(v) * a;
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        anchors.push_back(v / norm);
    }
    return anchors;
}

inline Embedding random_unit(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Embedding v(dim);
    do {
        for (int i = 0; i < dim; ++i) v[i] = n(rng);
    } while (v.norm() < 1e-9);
    return v / v.norm();
}

inline void reflect(double& pos, double& vel, double lo, double hi) {
    for (int guard = 0; guard < 8 && (pos < lo || pos > hi); ++guard) {
        if (pos < lo) {
            pos = 2 * lo - pos;
            vel = -vel;
        } else if (pos > hi) {
            pos = 2 * hi - pos;
            vel = -vel;
        }
    }
    pos = std::clamp(pos, lo, hi);
}

}  // namespace detail

/// Ground truth and noisy detections produced from one scenario.
struct SyntheticData {
    std::vector<GtEntry> gt;
    std::vector<Detection> detections;
};

/**
 * Simulates `identities` subjects whose velocity follows a damped,
 * speed-capped random walk inside the arena (reflective walls). Ground-truth
 * boxes are emitted every frame a subject is not occluded; detections are
 * jittered copies, dropped independently with `miss_rate`, plus Poisson
 * false positives with random embeddings. True-detection embeddings are the
 * identity's anchor plus Gaussian noise, normalized. All coordinates lie on a 0.01-pixel grid so
 * the on-disk format reproduces them exactly.
 */
inline SyntheticData generate(const ScenarioSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int dim = spec.embedding_dim;
    const auto anchors = detail::make_anchors(spec.identities, dim, rng);

    struct Subject {
        double cx, cy, vx, vy, w, h;
    };
    const double vmax = spec.max_speed_fraction * spec.arena_width;
    // Stationary velocity spread of the damped walk.
    const double rho = spec.velocity_persistence;
    const double v0 = spec.acceleration_sigma / std::sqrt(1.0 - rho * rho);
    std::vector<Subject> subjects;
    for (int k = 0; k < spec.identities; ++k) {
        Subject s{};
        s.h = spec.box_height * (0.8 + 0.4 * unit(rng));
        s.w = s.h * (0.4 + 0.2 * unit(rng));
        s.cx = s.w / 2 + unit(rng) * (spec.arena_width - s.w);
        s.cy = s.h / 2 + unit(rng) * (spec.arena_height - s.h);
        s.vx = v0 * gauss(rng);
        s.vy = v0 * gauss(rng);
        subjects.push_back(s);
    }

    auto occluded = [&](int identity, int frame) {
        return std::any_of(spec.occlusions.begin(), spec.occlusions.end(), [&](const Occlusion& o) {
            return o.identity == identity && frame >= o.start_frame && frame <= o.end_frame;
        });
    };

    SyntheticData out;
    std::poisson_distribution<int> fp_count(spec.false_positive_rate);
    for (int frame = 1; frame <= spec.frames; ++frame) {
        for (int k = 0; k < spec.identities; ++k) {
            auto& s = subjects[k];
            if (frame > 1) {
                s.vx = rho * s.vx + spec.acceleration_sigma * gauss(rng);
                s.vy = rho * s.vy + spec.acceleration_sigma * gauss(rng);
                const double speed = std::hypot(s.vx, s.vy);
                if (speed > vmax) {
                    s.vx *= vmax / speed;
                    s.vy *= vmax / speed;
                }
                s.cx += s.vx;
                s.cy += s.vy;
                detail::reflect(s.cx, s.vx, s.w / 2, spec.arena_width - s.w / 2);
                detail::reflect(s.cy, s.vy, s.h / 2, spec.arena_height - s.h / 2);
            }
            const int identity = k + 1;
            // Draws happen unconditionally so that occlusions and misses do
            // not shift the random stream of later frames.
            const double jitter_l = gauss(rng), jitter_t = gauss(rng);
            const double jitter_w = gauss(rng), jitter_h = gauss(rng);
            const double miss_draw = unit(rng);
            const double conf_draw = unit(rng);
            Embedding emb = anchors[k];
            for (int i = 0; i < dim; ++i) emb[i] += spec.embedding_noise_sigma * gauss(rng);

            if (occluded(identity, frame)) continue;
            const BoundingBox gt_box(detail::round_to_grid(s.cx - s.w / 2), detail::round_to_grid(s.cy - s.h / 2),
                                     detail::round_to_grid(s.w), detail::round_to_grid(s.h));
            out.gt.push_back({frame, identity, gt_box});
            if (miss_draw < spec.miss_rate) continue;

            BoundingBox det_box = gt_box;
            if (spec.motion_noise_sigma > 0.0) {
                const double sg = spec.motion_noise_sigma;
                det_box = BoundingBox(detail::round_to_grid(gt_box.left() + sg * jitter_l),
                                      detail::round_to_grid(gt_box.top() + sg * jitter_t),
                                      detail::round_to_grid(std::max(1.0, gt_box.width() + sg * jitter_w)),
                                      detail::round_to_grid(std::max(1.0, gt_box.height() + sg * jitter_h)));
            }
            const double conf = detail::round_to_grid(0.6 + 0.4 * conf_draw);
            out.detections.push_back({frame, det_box, conf, normalized(emb)});
        }
        const int n_fp = spec.false_positive_rate > 0.0 ? fp_count(rng) : 0;
        for (int f = 0; f < n_fp; ++f) {
            const double h = spec.box_height * (0.5 + 0.7 * unit(rng));
            const double w = h * (0.4 + 0.2 * unit(rng));
            const double left = unit(rng) * std::max(1.0, spec.arena_width - w);
            const double top = unit(rng) * std::max(1.0, spec.arena_height - h);
            const double conf = detail::round_to_grid(0.1 + 0.6 * unit(rng));
            const BoundingBox box(detail::round_to_grid(left), detail::round_to_grid(top),
                                  detail::round_to_grid(w), detail::round_to_grid(h));
            out.detections.push_back({frame, box, conf, detail::random_unit(dim, rng)});
        }
    }
    return out;
}

inline Sequence make_sequence(const ScenarioSpec& spec) {
    auto data = generate(spec);
    Sequence seq;
    seq.name = spec.name;
    seq.frame_count = spec.frames;
    seq.width = static_cast<int>(std::lround(spec.arena_width));
    seq.height = static_cast<int>(std::lround(spec.arena_height));
    seq.embedding_dim = spec.embedding_dim;
    seq.detections = std::move(data.detections);
    seq.gt = std::move(data.gt);
    return seq;
}

/// Named scenarios: `clean`, `occlusion`, `lookalike`, `crowded`.
inline std::vector<ScenarioSpec> preset_scenarios() {
    std::vector<ScenarioSpec> out;

    ScenarioSpec clean;
    clean.name = "clean";
    out.push_back(clean);

    ScenarioSpec occ;
    occ.name = "occlusion";
    occ.motion_noise_sigma = 1.0;
    occ.embedding_noise_sigma = 0.1;
    occ.occlusions = {{1, 40, 59}, {2, 80, 99}, {3, 120, 139}, {1, 160, 179}, {2, 200, 219}, {3, 240, 259}};
    out.push_back(occ);

    ScenarioSpec look;
    look.name = "lookalike";
    look.motion_noise_sigma = 2.0;
    look.miss_rate = 0.05;
    look.false_positive_rate = 0.2;
    look.embedding_noise_sigma = 0.3;
    look.occlusions = {{1, 60, 79}, {2, 150, 169}, {3, 220, 239}};
    out.push_back(look);

    ScenarioSpec crowded;
    crowded.name = "crowded";
    crowded.arena_width = 640.0;
    crowded.arena_height = 480.0;
    crowded.box_height = 100.0;
    crowded.acceleration_sigma = 0.5;
    crowded.motion_noise_sigma = 1.5;
    crowded.miss_rate = 0.05;
    crowded.false_positive_rate = 0.2;
    crowded.embedding_noise_sigma = 0.12;
    out.push_back(crowded);

    return out;
}

inline ScenarioSpec scenario_preset(std::string_view name) {
    for (auto& s : preset_scenarios()) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
}

/// Parses `key = value` scenario text; `occlusion = id, start, end` may repeat.
inline ScenarioSpec parse_scenario_spec(std::string_view text) {
    ScenarioSpec s;
    s.occlusions.clear();
    auto num = [](const KeyValue& kv) {
        auto v = detail::parse_double(kv.value);
        if (!v) throw ConfigError("scenario key '" + kv.key + "' expects a number");
        return *v;
    };
    auto integer = [](const KeyValue& kv) {
        auto v = detail::parse_int(kv.value);
        if (!v) throw ConfigError("scenario key '" + kv.key + "' expects an integer");
        return *v;
    };
    for (const auto& kv : parse_key_values(text)) {
        if (kv.key == "name") s.name = kv.value;
        else if (kv.key == "identities") s.identities = static_cast<int>(integer(kv));
        else if (kv.key == "frames") s.frames = static_cast<int>(integer(kv));
        else if (kv.key == "arena_width") s.arena_width = num(kv);
        else if (kv.key == "arena_height") s.arena_height = num(kv);
        else if (kv.key == "motion_noise_sigma") s.motion_noise_sigma = num(kv);
        else if (kv.key == "miss_rate") s.miss_rate = num(kv);
        else if (kv.key == "false_positive_rate") s.false_positive_rate = num(kv);
        else if (kv.key == "embedding_dim") s.embedding_dim = static_cast<int>(integer(kv));
        else if (kv.key == "embedding_noise_sigma") s.embedding_noise_sigma = num(kv);
        else if (kv.key == "acceleration_sigma") s.acceleration_sigma = num(kv);
        else if (kv.key == "velocity_persistence") s.velocity_persistence = num(kv);
        else if (kv.key == "max_speed_fraction") s.max_speed_fraction = num(kv);
        else if (kv.key == "box_height") s.box_height = num(kv);
        else if (kv.key == "seed") s.seed = static_cast<std::uint64_t>(integer(kv));
        else if (kv.key == "occlusion") {
            Occlusion o;
            std::string_view v = kv.value;
            int parts[3];
            for (int i = 0; i < 3; ++i) {
                const auto comma = v.find(',');
                auto p = detail::parse_int(v.substr(0, comma));
                if (!p) throw ConfigError("occlusion expects 'identity, start, end'");
                parts[i] = static_cast<int>(*p);
                if (i < 2) {
                    if (comma == std::string_view::npos) throw ConfigError("occlusion expects 'identity, start, end'");
                    v = v.substr(comma + 1);
                } else if (comma != std::string_view::npos) {
                    throw ConfigError("occlusion expects 'identity, start, end'");
                }
            }
            o.identity = parts[0];
            o.start_frame = parts[1];
            o.end_frame = parts[2];
            s.occlusions.push_back(o);
        } else {
            throw ConfigError("line " + std::to_string(kv.line) + ": unknown scenario key '" + kv.key + "'");
        }
    }
    validate(s);
    return s;
}

}  // namespace mttsort
