#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mttsort/mttsort.hpp"

namespace mttsort::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace fs = std::filesystem;

struct TrackArgs {
    std::string seq, config, preset, out, overlay;
};
struct EvaluateArgs {
    std::string seq, pred, report;
};
struct OptimizeArgs {
    std::vector<std::string> seqs;
    std::string ga_config, out, history;
};
struct SynthArgs {
    std::string preset, spec, out;
    std::optional<std::uint64_t> seed;
};

inline void run_track(const TrackArgs& a, std::ostream& out) {
    const Sequence seq = io::load_sequence(a.seq);
    const TrackerConfig cfg = a.preset.empty() ? parse_config(io::read_file(a.config)) : load_preset(a.preset);
    const auto results = run_sequence(seq.detections, cfg, seq.frame_count);
    io::write_results(results, a.out);
    if (!a.overlay.empty()) io::write_file(a.overlay, io::format_overlay(results));
    std::size_t rows = 0;
    for (const auto& r : results) rows += r.records.size();
    out << "tracked " << seq.name << ": " << results.size() << " frames, " << rows << " boxes -> " << a.out << "\n";
}

inline void run_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const Sequence seq = io::load_sequence(a.seq);
    if (seq.gt.empty()) throw MetricError("sequence '" + seq.name + "' has no ground truth");
    const auto results = io::parse_results(io::read_file(a.pred));
    const auto pred = to_tracked_boxes(results);
    const auto report = evaluate(seq.gt, pred);
    const std::string text = io::format_report(report);
    out << text;
    if (!a.report.empty()) io::write_file(a.report, text);
}

inline void run_optimize(const OptimizeArgs& a, std::ostream& out) {
    const auto setup = io::parse_ga_config(io::read_file(a.ga_config));
    std::vector<Sequence> seqs;
    for (const auto& dir : a.seqs) {
        seqs.push_back(io::load_sequence(dir));
        if (seqs.back().gt.empty()) throw MetricError("sequence '" + seqs.back().name + "' has no ground truth");
    }
    const FitnessFn fitness = [&](const TrackerConfig& c) { return evaluate_fitness(c, seqs); };
    const auto result = run_ga(setup.genes, setup.ga, fitness);
    std::string text = "# optimized by genetic search over " + std::to_string(seqs.size()) + " sub-scene(s)\n";
    text += "# score = " + io::detail::fixed(result.score, 6) + "\n";
    text += "# generations = " + std::to_string(result.history.size()) + "\n";
    text += format_config(result.best);
    io::write_file(a.out, text);
    const std::string history_path = a.history.empty() ? a.out + ".history.csv" : a.history;
    io::write_file(history_path, io::format_history(result.history));
    out << "best score " << io::detail::fixed(result.score, 6) << " after " << result.history.size()
        << " generation(s) -> " << a.out << "\n";
}

inline void run_synth(const SynthArgs& a, std::ostream& out) {
    ScenarioSpec spec = a.preset.empty() ? parse_scenario_spec(io::read_file(a.spec)) : scenario_preset(a.preset);
    if (a.seed) spec.seed = *a.seed;
    const Sequence seq = make_sequence(spec);
    io::save_sequence(seq, a.out);
    out << "wrote " << spec.name << " (" << seq.frame_count << " frames, " << seq.detections.size()
        << " detections, " << seq.gt.size() << " gt boxes) -> " << a.out << "\n";
}

/// Entry point shared by the executable and the tests. Returns 0 on success,
/// 1 on usage errors, 2 on data errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"mttsort: multi-object tracking with pooled appearance buffers, metrics, and GA tuning"};
    app.require_subcommand(1);

    TrackArgs track;
    auto* t = app.add_subcommand("track", "track one sequence directory");
    t->add_option("--seq", track.seq, "sequence directory")->required()->check(CLI::ExistingDirectory);
    auto* t_cfg = t->add_option("--config", track.config, "tracker config file")->check(CLI::ExistingFile);
    auto* t_pre = t->add_option("--preset", track.preset, "named config preset (config1..config7)");
    t_cfg->excludes(t_pre);
    t->add_option("--out", track.out, "results file")->required();
    t->add_option("--overlay", track.overlay, "optional overlay description file");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "score predictions against ground truth");
    e->add_option("--seq", ev.seq, "sequence directory with gt.txt")->required()->check(CLI::ExistingDirectory);
    e->add_option("--pred", ev.pred, "results file")->required()->check(CLI::ExistingFile);
    e->add_option("--report", ev.report, "write the report here as well");

    OptimizeArgs opt;
    auto* o = app.add_subcommand("optimize", "genetic search for tracker hyperparameters");
    o->add_option("--seqs", opt.seqs, "sub-scene directories")->required()->expected(1, -1)->check(CLI::ExistingDirectory);
    o->add_option("--ga-config", opt.ga_config, "GA config file")->required()->check(CLI::ExistingFile);
    o->add_option("--out", opt.out, "best tracker config output")->required();
    o->add_option("--history", opt.history, "per-generation history (default: <out>.history.csv)");

    SynthArgs syn;
    auto* s = app.add_subcommand("synth", "generate a synthetic sequence directory");
    auto* s_pre = s->add_option("--preset", syn.preset, "clean | occlusion | lookalike | crowded");
    auto* s_spec = s->add_option("--spec", syn.spec, "scenario spec file")->check(CLI::ExistingFile);
    s_pre->excludes(s_spec);
    s->add_option("--out", syn.out, "output directory")->required();
    s->add_option("--seed", syn.seed, "override the scenario seed");

    try {
        app.parse(argc, argv);
        if (t->parsed() && track.config.empty() && track.preset.empty()) {
            throw CLI::RequiredError("track needs --config or --preset");
        }
        if (s->parsed() && syn.preset.empty() && syn.spec.empty()) {
            throw CLI::RequiredError("synth needs --preset or --spec");
        }
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (t->parsed()) run_track(track, out);
        if (e->parsed()) run_evaluate(ev, out);
        if (o->parsed()) run_optimize(opt, out);
        if (s->parsed()) run_synth(syn, out);
    } catch (const Error& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace mttsort::cli
