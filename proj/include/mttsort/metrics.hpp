#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "mttsort/assignment.hpp"
#include "mttsort/association.hpp"
#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"
#include "mttsort/tracker.hpp"

namespace mttsort {

/// One box of a trajectory, ground truth or predicted.
struct TrackedBox {
    int frame = 0;
    int id = 0;
    BoundingBox box;

    friend bool operator==(const TrackedBox&, const TrackedBox&) = default;
};

using GtEntry = TrackedBox;

struct EvalReport {
    double hota = 0.0;
    double mota = 0.0;
    double idf1 = 0.0;
    double det_re = 0.0;
    double det_pr = 0.0;
    double det_a = 0.0;
    double ass_a = 0.0;
    long long fn_count = 0;
    long long fp_count = 0;
    long long idsw_count = 0;
    long long frag_count = 0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline constexpr double kClearIouThreshold = 0.5;

/// Similarities are compared on a 1e-9 integer grid so matching decisions are
/// exact and reproducible.
inline std::int64_t quantize_similarity(double s) { return std::llround(s * 1e9); }

inline std::vector<TrackedBox> to_tracked_boxes(std::span<const FrameResult> results) {
    std::vector<TrackedBox> out;
    for (const auto& fr : results) {
        for (const auto& r : fr.records) out.push_back({fr.frame, r.track_id, r.box});
    }
    return out;
}

namespace detail {

/// Per-frame view of a sequence: frame -> indices into the entry list.
struct FrameIndex {
    std::map<int, std::vector<int>> by_frame;
};

inline FrameIndex index_frames(std::span<const TrackedBox> entries, const char* what) {
    FrameIndex fi;
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        if (!seen.emplace(entries[i].frame, entries[i].id).second) {
            throw MetricError(std::string(what) + " has duplicate (frame " +
                              std::to_string(entries[i].frame) + ", id " +
                              std::to_string(entries[i].id) + ")");
        }
        fi.by_frame[entries[i].frame].push_back(i);
    }
    return fi;
}

inline void require_gt(std::span<const TrackedBox> gt) {
    if (gt.empty()) throw MetricError("metric undefined: ground truth has no boxes");
}

}  // namespace detail

struct ClearFrameResult {
    std::vector<std::pair<int, int>> matches;  ///< (gt id, predicted id)
    int fn = 0;
    int fp = 0;
    int idsw = 0;
};

/**
 * CLEAR-MOT matching for one frame. `last_match` maps each GT id to the
 * predicted id it was most recently matched to and is updated in place.
 * Existing correspondences with IoU >= 0.5 are kept; the rest is matched by
 * minimum total (1 - IoU) over pairs with IoU >= 0.5.
 */
inline ClearFrameResult clear_match(std::span<const TrackedBox> gt_frame,
                                    std::span<const TrackedBox> pred_frame,
                                    std::map<int, int>& last_match) {
    ClearFrameResult r;
    const int ng = static_cast<int>(gt_frame.size());
    const int np = static_cast<int>(pred_frame.size());
    std::vector<int> pred_of_gt(ng, -1);
    std::vector<char> pred_used(np, 0);

    for (int g = 0; g < ng; ++g) {
        auto it = last_match.find(gt_frame[g].id);
        if (it == last_match.end()) continue;
        for (int p = 0; p < np; ++p) {
            if (pred_used[p] || pred_frame[p].id != it->second) continue;
            if (iou(gt_frame[g].box, pred_frame[p].box) >= kClearIouThreshold) {
                pred_of_gt[g] = p;
                pred_used[p] = 1;
            }
            break;
        }
    }

    std::vector<int> free_g, free_p;
    for (int g = 0; g < ng; ++g) {
        if (pred_of_gt[g] < 0) free_g.push_back(g);
    }
    for (int p = 0; p < np; ++p) {
        if (!pred_used[p]) free_p.push_back(p);
    }
    std::vector<std::vector<double>> sim(free_g.size(), std::vector<double>(free_p.size()));
    for (std::size_t a = 0; a < free_g.size(); ++a) {
        for (std::size_t b = 0; b < free_p.size(); ++b) {
            sim[a][b] = iou(gt_frame[free_g[a]].box, pred_frame[free_p[b]].box);
        }
    }
    const auto col = max_matching_min_cost<std::int64_t>(
        static_cast<int>(free_g.size()), static_cast<int>(free_p.size()),
        [&](int a, int b) { return sim[a][b] >= kClearIouThreshold; },
        [&](int a, int b) { return quantize_similarity(1.0 - sim[a][b]); });
    for (std::size_t a = 0; a < free_g.size(); ++a) {
        if (col[a] >= 0) {
            pred_of_gt[free_g[a]] = free_p[col[a]];
            pred_used[free_p[col[a]]] = 1;
        }
    }

    for (int g = 0; g < ng; ++g) {
        if (pred_of_gt[g] < 0) {
            ++r.fn;
            continue;
        }
        const int gid = gt_frame[g].id;
        const int pid = pred_frame[pred_of_gt[g]].id;
        auto it = last_match.find(gid);
        if (it != last_match.end() && it->second != pid) ++r.idsw;
        last_match[gid] = pid;
        r.matches.emplace_back(gid, pid);
    }
    r.fp = np - static_cast<int>(r.matches.size());
    return r;
}

struct ClearResult {
    long long num_gt = 0;
    long long fn = 0;
    long long fp = 0;
    long long idsw = 0;
    long long frag = 0;
    double mota = 0.0;
};

/// CLEAR-MOT over a whole sequence, including fragmentation counts.
inline ClearResult evaluate_clear(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    detail::require_gt(gt);
    const auto gi = detail::index_frames(gt, "ground truth");
    const auto pi = detail::index_frames(pred, "predictions");
    std::set<int> frames;
    for (const auto& [f, _] : gi.by_frame) frames.insert(f);
    for (const auto& [f, _] : pi.by_frame) frames.insert(f);

    ClearResult r;
    r.num_gt = static_cast<long long>(gt.size());
    std::map<int, int> last_match;
    // Per GT id: has it been covered yet, and is it currently inside a gap.
    std::map<int, std::pair<bool, bool>> coverage;
    for (int f : frames) {
        std::vector<TrackedBox> gf, pf;
        if (auto it = gi.by_frame.find(f); it != gi.by_frame.end()) {
            for (int i : it->second) gf.push_back(gt[i]);
        }
        if (auto it = pi.by_frame.find(f); it != pi.by_frame.end()) {
            for (int i : it->second) pf.push_back(pred[i]);
        }
        const auto fr = clear_match(gf, pf, last_match);
        r.fn += fr.fn;
        r.fp += fr.fp;
        r.idsw += fr.idsw;
        std::set<int> matched;
        for (auto [g, _] : fr.matches) matched.insert(g);
        for (const auto& g : gf) {
            auto& [seen, in_gap] = coverage[g.id];
            if (matched.count(g.id)) {
                if (in_gap) ++r.frag;
                in_gap = false;
                seen = true;
            } else if (seen) {
                in_gap = true;
            }
        }
    }
    r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / static_cast<double>(r.num_gt);
    return r;
}

inline double mota(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    return evaluate_clear(gt, pred).mota;
}

inline long long fragmentation_count(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    if (gt.empty()) return 0;
    return evaluate_clear(gt, pred).frag;
}

namespace detail {

/// Dense id numbering for a trajectory set.
inline std::map<int, int> dense_ids(std::span<const TrackedBox> entries) {
    std::map<int, int> ids;
    for (const auto& e : entries) ids.emplace(e.id, 0);
    int k = 0;
    for (auto& [_, v] : ids) v = k++;
    return ids;
}

/// IoU of every (gt, pred) pair sharing a frame.
struct FramePairs {
    std::vector<int> gt;    ///< dense gt ids present this frame
    std::vector<int> pred;  ///< dense pred ids present this frame
    std::vector<std::vector<double>> sim;
};

inline std::vector<FramePairs> frame_pairs(std::span<const TrackedBox> gt,
                                           std::span<const TrackedBox> pred,
                                           const std::map<int, int>& gid,
                                           const std::map<int, int>& pid) {
    const auto gi = index_frames(gt, "ground truth");
    const auto pi = index_frames(pred, "predictions");
    std::vector<FramePairs> out;
    for (const auto& [f, gidx] : gi.by_frame) {
        FramePairs fp;
        auto it = pi.by_frame.find(f);
        std::vector<int> pidx = it == pi.by_frame.end() ? std::vector<int>{} : it->second;
        for (int i : gidx) fp.gt.push_back(gid.at(gt[i].id));
        for (int j : pidx) fp.pred.push_back(pid.at(pred[j].id));
        fp.sim.assign(gidx.size(), std::vector<double>(pidx.size(), 0.0));
        for (std::size_t a = 0; a < gidx.size(); ++a) {
            for (std::size_t b = 0; b < pidx.size(); ++b) {
                fp.sim[a][b] = iou(gt[gidx[a]].box, pred[pidx[b]].box);
            }
        }
        out.push_back(std::move(fp));
    }
    return out;
}

}  // namespace detail

struct IdentityResult {
    long long idtp = 0;
    long long idfp = 0;
    long long idfn = 0;
    double idf1 = 0.0;
};

/// Identity metrics under the single global GT-to-prediction id mapping that
/// maximizes identity true positives.
inline IdentityResult evaluate_identity(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    detail::require_gt(gt);
    const auto gid = detail::dense_ids(gt);
    const auto pid = detail::dense_ids(pred);
    const int ng = static_cast<int>(gid.size());
    const int np = static_cast<int>(pid.size());
    std::vector<std::vector<std::int64_t>> overlap(ng, std::vector<std::int64_t>(np, 0));
    for (const auto& fp : detail::frame_pairs(gt, pred, gid, pid)) {
        for (std::size_t a = 0; a < fp.gt.size(); ++a) {
            for (std::size_t b = 0; b < fp.pred.size(); ++b) {
                if (fp.sim[a][b] >= kClearIouThreshold) ++overlap[fp.gt[a]][fp.pred[b]];
            }
        }
    }
    const auto col = max_matching_min_cost<std::int64_t>(
        ng, np, [](int, int) { return true; }, [&](int g, int p) { return -overlap[g][p]; });
    IdentityResult r;
    for (int g = 0; g < ng; ++g) {
        if (col[g] >= 0) r.idtp += overlap[g][col[g]];
    }
    r.idfn = static_cast<long long>(gt.size()) - r.idtp;
    r.idfp = static_cast<long long>(pred.size()) - r.idtp;
    r.idf1 = 2.0 * static_cast<double>(r.idtp) /
             static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
    return r;
}

inline double idf1(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    return evaluate_identity(gt, pred).idf1;
}

struct HotaResult {
    double hota = 0.0;
    double det_a = 0.0;
    double ass_a = 0.0;
    double det_re = 0.0;
    double det_pr = 0.0;
};

/// Scores at a single localization threshold.
struct HotaAlphaResult {
    double alpha = 0.0;
    long long tp = 0;
    long long fn = 0;
    long long fp = 0;
    double det_a = 0.0;
    double ass_a = 0.0;
    double det_re = 0.0;
    double det_pr = 0.0;
    double hota = 0.0;
    /// (gt id, predicted id) of every true positive, in frame order.
    std::vector<std::pair<int, int>> tp_pairs;
};

inline std::vector<double> hota_alphas() {
    std::vector<double> a;
    for (int k = 1; k <= 19; ++k) a.push_back(k / 20.0);
    return a;
}

/// HOTA family at every alpha in {0.05, ..., 0.95}. Per-frame matching
/// maximizes the number of pairs with IoU >= alpha, then their total IoU.
inline std::vector<HotaAlphaResult> hota_per_alpha(std::span<const TrackedBox> gt,
                                                   std::span<const TrackedBox> pred) {
    detail::require_gt(gt);
    const auto gid = detail::dense_ids(gt);
    const auto pid = detail::dense_ids(pred);
    std::vector<int> gt_of_dense(gid.size()), pred_of_dense(pid.size());
    for (auto [id, k] : gid) gt_of_dense[k] = id;
    for (auto [id, k] : pid) pred_of_dense[k] = id;
    std::vector<long long> gt_count(gid.size(), 0), pred_count(pid.size(), 0);
    for (const auto& e : gt) ++gt_count[gid.at(e.id)];
    for (const auto& e : pred) ++pred_count[pid.at(e.id)];

    const auto frames = detail::frame_pairs(gt, pred, gid, pid);
    const long long n_gt = static_cast<long long>(gt.size());
    const long long n_pred = static_cast<long long>(pred.size());

    std::vector<HotaAlphaResult> out;
    for (double alpha : hota_alphas()) {
        HotaAlphaResult r;
        r.alpha = alpha;
        std::map<std::pair<int, int>, long long> pair_tp;
        for (const auto& fp : frames) {
            const auto col = max_matching_min_cost<std::int64_t>(
                static_cast<int>(fp.gt.size()), static_cast<int>(fp.pred.size()),
                [&](int a, int b) { return fp.sim[a][b] >= alpha; },
                [&](int a, int b) { return -quantize_similarity(fp.sim[a][b]); });
            for (std::size_t a = 0; a < fp.gt.size(); ++a) {
                if (col[a] < 0) continue;
                ++pair_tp[{fp.gt[a], fp.pred[col[a]]}];
                r.tp_pairs.emplace_back(gt_of_dense[fp.gt[a]], pred_of_dense[fp.pred[col[a]]]);
            }
        }
        r.tp = static_cast<long long>(r.tp_pairs.size());
        r.fn = n_gt - r.tp;
        r.fp = n_pred - r.tp;
        double ass_sum = 0.0;
        for (const auto& [pair, tpa] : pair_tp) {
            const long long fna = gt_count[pair.first] - tpa;
            const long long fpa = pred_count[pair.second] - tpa;
            ass_sum += static_cast<double>(tpa) *
                       (static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa));
        }
        r.ass_a = r.tp > 0 ? ass_sum / static_cast<double>(r.tp) : 0.0;
        r.det_a = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn + r.fp);
        r.det_re = static_cast<double>(r.tp) / static_cast<double>(n_gt);
        r.det_pr = n_pred > 0 ? static_cast<double>(r.tp) / static_cast<double>(n_pred) : 0.0;
        r.hota = std::sqrt(r.det_a * r.ass_a);
        out.push_back(std::move(r));
    }
    return out;
}

inline HotaResult hota(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    const auto per_alpha = hota_per_alpha(gt, pred);
    HotaResult r;
    for (const auto& a : per_alpha) {
        r.hota += a.hota;
        r.det_a += a.det_a;
        r.ass_a += a.ass_a;
        r.det_re += a.det_re;
        r.det_pr += a.det_pr;
    }
    const double n = static_cast<double>(per_alpha.size());
    r.hota /= n;
    r.det_a /= n;
    r.ass_a /= n;
    r.det_re /= n;
    r.det_pr /= n;
    return r;
}

inline EvalReport evaluate(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred) {
    const auto clear = evaluate_clear(gt, pred);
    const auto ident = evaluate_identity(gt, pred);
    const auto h = hota(gt, pred);
    EvalReport r;
    r.hota = h.hota;
    r.mota = clear.mota;
    r.idf1 = ident.idf1;
    r.det_re = h.det_re;
    r.det_pr = h.det_pr;
    r.det_a = h.det_a;
    r.ass_a = h.ass_a;
    r.fn_count = clear.fn;
    r.fp_count = clear.fp;
    r.idsw_count = clear.idsw;
    r.frag_count = clear.frag;
    return r;
}

/// Equal-weight aggregate used as GA fitness.
inline double score(const EvalReport& r) { return r.hota + r.mota + r.idf1; }

/// Mean of every rate, sum of every count.
inline EvalReport average_reports(std::span<const EvalReport> reports) {
    if (reports.empty()) throw MetricError("cannot average an empty list of reports");
    EvalReport out;
    for (const auto& r : reports) {
        out.hota += r.hota;
        out.mota += r.mota;
        out.idf1 += r.idf1;
        out.det_re += r.det_re;
        out.det_pr += r.det_pr;
        out.det_a += r.det_a;
        out.ass_a += r.ass_a;
        out.fn_count += r.fn_count;
        out.fp_count += r.fp_count;
        out.idsw_count += r.idsw_count;
        out.frag_count += r.frag_count;
    }
    const double n = static_cast<double>(reports.size());
    out.hota /= n;
    out.mota /= n;
    out.idf1 /= n;
    out.det_re /= n;
    out.det_pr /= n;
    out.det_a /= n;
    out.ass_a /= n;
    return out;
}

}  // namespace mttsort
