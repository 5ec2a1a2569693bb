#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mttsort/config.hpp"
#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"
#include "mttsort/ga.hpp"
#include "mttsort/metrics.hpp"
#include "mttsort/sequence.hpp"
#include "mttsort/tracker.hpp"

namespace mttsort::io {

namespace fs = std::filesystem;

inline constexpr const char* kMetaFile = "meta.txt";
inline constexpr const char* kDetectionsFile = "det.txt";
inline constexpr const char* kGroundTruthFile = "gt.txt";

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(mttsort::detail::trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

/// Calls `fn(fields, line_no)` for every non-blank line.
template <typename Fn>
void for_each_row(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = mttsort::detail::trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        fn(split_csv(line), line_no);
    }
}

inline double field_double(std::string_view s, std::size_t line, const char* what) {
    auto v = mttsort::detail::parse_double(s);
    if (!v) throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
    return *v;
}

inline int field_int(std::string_view s, std::size_t line, const char* what) {
    // Accept integral values written as reals (e.g. "3.0").
    auto i = mttsort::detail::parse_int(s);
    if (i) return static_cast<int>(*i);
    auto d = mttsort::detail::parse_double(s);
    if (d && *d == std::floor(*d)) return static_cast<int>(*d);
    throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
}

inline BoundingBox field_box(const std::vector<std::string_view>& f, std::size_t line) {
    const double l = field_double(f[2], line, "left");
    const double t = field_double(f[3], line, "top");
    const double w = field_double(f[4], line, "width");
    const double h = field_double(f[5], line, "height");
    if (!(w > 0.0) || !(h > 0.0)) throw ParseError("box width and height must be positive", line);
    return {l, t, w, h};
}

}  // namespace detail

// ---- meta file -------------------------------------------------------------

inline Sequence parse_meta(std::string_view text) {
    Sequence s;
    bool has[5] = {};
    for (const auto& kv : parse_key_values(text)) {
        auto integer = [&] {
            auto v = mttsort::detail::parse_int(kv.value);
            if (!v) throw SchemaError("meta key '" + kv.key + "' expects an integer");
            return static_cast<int>(*v);
        };
        if (kv.key == "name") { s.name = kv.value; has[0] = true; }
        else if (kv.key == "frame_count") { s.frame_count = integer(); has[1] = true; }
        else if (kv.key == "width") { s.width = integer(); has[2] = true; }
        else if (kv.key == "height") { s.height = integer(); has[3] = true; }
        else if (kv.key == "embedding_dim") { s.embedding_dim = integer(); has[4] = true; }
        else throw SchemaError("unknown meta key '" + kv.key + "'");
    }
    static const char* names[] = {"name", "frame_count", "width", "height", "embedding_dim"};
    for (int i = 0; i < 5; ++i) {
        if (!has[i]) throw SchemaError(std::string("meta file is missing '") + names[i] + "'");
    }
    if (s.frame_count < 0 || s.embedding_dim < 1 || s.width < 0 || s.height < 0) {
        throw SchemaError("meta values out of range");
    }
    return s;
}

inline std::string format_meta(const Sequence& s) {
    std::string out;
    out += "name = " + s.name + "\n";
    out += "frame_count = " + std::to_string(s.frame_count) + "\n";
    out += "width = " + std::to_string(s.width) + "\n";
    out += "height = " + std::to_string(s.height) + "\n";
    out += "embedding_dim = " + std::to_string(s.embedding_dim) + "\n";
    return out;
}

// ---- detections ------------------------------------------------------------

/// Rows `frame,-1,left,top,width,height,conf,e1,...,eD`. Embeddings are
/// L2-normalized; the result is stably sorted by frame.
inline std::vector<Detection> parse_detections(std::string_view text, int embedding_dim) {
    std::vector<Detection> out;
    detail::for_each_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() < 8) {
            throw ParseError("detection row needs 7 + embedding_dim fields, got " + std::to_string(f.size()), line);
        }
        if (static_cast<int>(f.size()) != 7 + embedding_dim) {
            throw SchemaError("line " + std::to_string(line) + ": embedding has " + std::to_string(f.size() - 7) +
                              " values, meta declares " + std::to_string(embedding_dim));
        }
        Detection d;
        d.frame = detail::field_int(f[0], line, "frame");
        if (d.frame < 1) throw ParseError("frame index must be >= 1", line);
        d.box = detail::field_box(f, line);
        d.confidence = detail::field_double(f[6], line, "confidence");
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw ParseError("confidence must be in [0, 1]", line);
        Embedding e(embedding_dim);
        for (int i = 0; i < embedding_dim; ++i) e[i] = detail::field_double(f[7 + i], line, "embedding value");
        const double n = e.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw ParseError("embedding has zero norm", line);
        d.embedding = e / n;
        out.push_back(std::move(d));
    });
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
    return out;
}

inline std::string format_detections(std::span<const Detection> dets) {
    std::string out;
    for (const auto& d : dets) {
        out += std::to_string(d.frame) + ",-1," + detail::fixed(d.box.left(), 2) + "," + detail::fixed(d.box.top(), 2) +
               "," + detail::fixed(d.box.width(), 2) + "," + detail::fixed(d.box.height(), 2) + "," +
               detail::fixed(d.confidence, 2);
        for (Eigen::Index i = 0; i < d.embedding.size(); ++i) out += "," + detail::fixed(d.embedding[i], 6);
        out += '\n';
    }
    return out;
}

// ---- ground truth and results ----------------------------------------------

/// Rows `frame,id,left,top,width,height[,...]`.
inline std::vector<GtEntry> parse_ground_truth(std::string_view text) {
    std::vector<GtEntry> out;
    detail::for_each_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() < 6) throw ParseError("ground-truth row needs at least 6 fields", line);
        GtEntry e;
        e.frame = detail::field_int(f[0], line, "frame");
        e.id = detail::field_int(f[1], line, "id");
        if (e.frame < 1) throw ParseError("frame index must be >= 1", line);
        if (e.id < 1) throw ParseError("identity must be positive", line);
        e.box = detail::field_box(f, line);
        out.push_back(e);
    });
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::pair(a.frame, a.id) < std::pair(b.frame, b.id);
    });
    return out;
}

inline std::string format_ground_truth(std::span<const GtEntry> gt) {
    std::vector<GtEntry> sorted(gt.begin(), gt.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::pair(a.frame, a.id) < std::pair(b.frame, b.id);
    });
    std::string out;
    for (const auto& e : sorted) {
        out += std::to_string(e.frame) + "," + std::to_string(e.id) + "," + detail::fixed(e.box.left(), 2) + "," +
               detail::fixed(e.box.top(), 2) + "," + detail::fixed(e.box.width(), 2) + "," +
               detail::fixed(e.box.height(), 2) + ",1,-1,-1,-1\n";
    }
    return out;
}

/// Rows `frame,id,left,top,width,height,conf,-1,-1,-1` sorted by (frame, id).
/// Frames without records produce no rows.
inline std::string format_results(std::span<const FrameResult> results) {
    std::vector<std::pair<int, TrackRecord>> rows;
    for (const auto& fr : results) {
        for (const auto& r : fr.records) rows.emplace_back(fr.frame, r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::pair(a.first, a.second.track_id) < std::pair(b.first, b.second.track_id);
    });
    std::string out;
    for (const auto& [frame, r] : rows) {
        out += std::to_string(frame) + "," + std::to_string(r.track_id) + "," + detail::fixed(r.box.left(), 2) + "," +
               detail::fixed(r.box.top(), 2) + "," + detail::fixed(r.box.width(), 2) + "," +
               detail::fixed(r.box.height(), 2) + "," + detail::fixed(r.confidence, 4) + ",-1,-1,-1\n";
    }
    return out;
}

inline std::vector<FrameResult> parse_results(std::string_view text) {
    std::vector<FrameResult> out;
    detail::for_each_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() < 7) throw ParseError("result row needs at least 7 fields", line);
        const int frame = detail::field_int(f[0], line, "frame");
        if (frame < 1) throw ParseError("frame index must be >= 1", line);
        TrackRecord r;
        r.track_id = detail::field_int(f[1], line, "id");
        r.box = detail::field_box(f, line);
        r.confidence = detail::field_double(f[6], line, "confidence");
        if (out.empty() || out.back().frame != frame) {
            if (!out.empty() && out.back().frame > frame) throw ParseError("result rows are not sorted by frame", line);
            out.push_back({frame, {}});
        }
        out.back().records.push_back(r);
    });
    for (auto& fr : out) {
        std::stable_sort(fr.records.begin(), fr.records.end(),
                         [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
    }
    return out;
}

inline void write_results(std::span<const FrameResult> results, const fs::path& path) {
    write_file(path, format_results(results));
}

/// Plain-text overlay: one line per frame, `frame: id@left,top,width,height; ...`.
inline std::string format_overlay(std::span<const FrameResult> results) {
    std::string out;
    for (const auto& fr : results) {
        out += std::to_string(fr.frame) + ":";
        for (std::size_t i = 0; i < fr.records.size(); ++i) {
            const auto& r = fr.records[i];
            out += (i == 0 ? " " : "; ") + std::to_string(r.track_id) + "@" + detail::fixed(r.box.left(), 2) + "," +
                   detail::fixed(r.box.top(), 2) + "," + detail::fixed(r.box.width(), 2) + "," +
                   detail::fixed(r.box.height(), 2);
        }
        out += '\n';
    }
    return out;
}

// ---- sequence directories ---------------------------------------------------

/// Reads `meta.txt`, `det.txt`, and `gt.txt` when present.
inline Sequence load_sequence(const fs::path& dir) {
    Sequence seq = parse_meta(read_file(dir / kMetaFile));
    seq.detections = parse_detections(read_file(dir / kDetectionsFile), seq.embedding_dim);
    for (const auto& d : seq.detections) {
        if (d.frame > seq.frame_count) {
            throw SchemaError("detection frame " + std::to_string(d.frame) + " exceeds frame_count " +
                              std::to_string(seq.frame_count));
        }
    }
    if (fs::exists(dir / kGroundTruthFile)) {
        seq.gt = parse_ground_truth(read_file(dir / kGroundTruthFile));
        for (const auto& g : seq.gt) {
            if (g.frame > seq.frame_count) throw SchemaError("ground-truth frame exceeds frame_count");
        }
    }
    return seq;
}

inline void save_sequence(const Sequence& seq, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / kMetaFile, format_meta(seq));
    write_file(dir / kDetectionsFile, format_detections(seq.detections));
    write_file(dir / kGroundTruthFile, format_ground_truth(seq.gt));
}

// ---- reports ----------------------------------------------------------------

/// `metric = value` lines, rates with 5 decimals.
inline std::string format_report(const EvalReport& r) {
    std::string out;
    auto rate = [&](const char* k, double v) { out += std::string(k) + " = " + detail::fixed(v, 5) + "\n"; };
    auto count = [&](const char* k, long long v) { out += std::string(k) + " = " + std::to_string(v) + "\n"; };
    rate("HOTA", r.hota);
    rate("DetA", r.det_a);
    rate("AssA", r.ass_a);
    rate("DetRe", r.det_re);
    rate("DetPr", r.det_pr);
    rate("MOTA", r.mota);
    rate("IDF1", r.idf1);
    count("FN", r.fn_count);
    count("FP", r.fp_count);
    count("IDSW", r.idsw_count);
    count("Frag", r.frag_count);
    rate("Score", score(r));
    return out;
}

inline std::string report_table_header() {
    return "name,HOTA,DetA,AssA,DetRe,DetPr,MOTA,IDF1,FN,FP,IDSW,Frag,Score";
}

inline std::string report_table_row(std::string_view name, const EvalReport& r) {
    return std::string(name) + "," + detail::fixed(r.hota, 5) + "," + detail::fixed(r.det_a, 5) + "," +
           detail::fixed(r.ass_a, 5) + "," + detail::fixed(r.det_re, 5) + "," + detail::fixed(r.det_pr, 5) + "," +
           detail::fixed(r.mota, 5) + "," + detail::fixed(r.idf1, 5) + "," + std::to_string(r.fn_count) + "," +
           std::to_string(r.fp_count) + "," + std::to_string(r.idsw_count) + "," + std::to_string(r.frag_count) +
           "," + detail::fixed(score(r), 5);
}

// ---- GA configuration and history -------------------------------------------

struct GaSetup {
    GAConfig ga;
    std::vector<GeneSpec> genes;  ///< default ranges unless `gene.<field>` lines are present
};

/// Keys: population_size, max_generations, mutation_rate, crossover_rate,
/// tolerance, seed, threads, and optional `gene.<field> = low, high` lines.
inline GaSetup parse_ga_config(std::string_view text) {
    GaSetup s;
    std::vector<GeneSpec> genes;
    for (const auto& kv : parse_key_values(text)) {
        auto num = [&] {
            auto v = mttsort::detail::parse_double(kv.value);
            if (!v) throw ConfigError("GA key '" + kv.key + "' expects a number");
            return *v;
        };
        auto integer = [&] {
            auto v = mttsort::detail::parse_int(kv.value);
            if (!v) throw ConfigError("GA key '" + kv.key + "' expects an integer");
            return *v;
        };
        if (kv.key == "population_size") s.ga.population_size = static_cast<int>(integer());
        else if (kv.key == "max_generations") s.ga.max_generations = static_cast<int>(integer());
        else if (kv.key == "mutation_rate") s.ga.mutation_rate = num();
        else if (kv.key == "crossover_rate") s.ga.crossover_rate = num();
        else if (kv.key == "tolerance") s.ga.tolerance = num();
        else if (kv.key == "seed") s.ga.seed = static_cast<std::uint64_t>(integer());
        else if (kv.key == "threads") s.ga.threads = static_cast<int>(integer());
        else if (kv.key.rfind("gene.", 0) == 0) {
            const std::string name = kv.key.substr(5);
            const auto& field = config_field(name);
            const auto comma = kv.value.find(',');
            if (comma == std::string::npos) throw ConfigError("gene '" + name + "' expects 'low, high'");
            auto lo = mttsort::detail::parse_double(std::string_view(kv.value).substr(0, comma));
            auto hi = mttsort::detail::parse_double(std::string_view(kv.value).substr(comma + 1));
            if (!lo || !hi) throw ConfigError("gene '" + name + "' expects 'low, high'");
            GeneSpec g{name, field.kind, *lo, *hi};
            validate(g);
            genes.push_back(g);
        } else {
            throw ConfigError("line " + std::to_string(kv.line) + ": unknown GA key '" + kv.key + "'");
        }
    }
    validate(s.ga);
    s.genes = genes.empty() ? default_gene_specs() : genes;
    return s;
}

inline std::string format_history(std::span<const GenerationStats> history) {
    std::string out = "generation,best,mean,std\n";
    for (const auto& h : history) {
        out += std::to_string(h.generation) + "," + detail::fixed(h.best, 6) + "," + detail::fixed(h.mean, 6) + "," +
               detail::fixed(h.std, 6) + "\n";
    }
    return out;
}

}  // namespace mttsort::io
