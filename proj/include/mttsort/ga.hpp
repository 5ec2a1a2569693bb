#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mttsort/config.hpp"
#include "mttsort/metrics.hpp"
#include "mttsort/sequence.hpp"
#include "mttsort/tracker.hpp"

namespace mttsort {

/// A searchable TrackerConfig field and its inclusive range.
struct GeneSpec {
    std::string name;
    FieldKind kind = FieldKind::Real;
    double low = 0.0;
    double high = 1.0;
};

inline void validate(const GeneSpec& g) {
    const auto& field = config_field(g.name);
    if (g.kind != field.kind) throw ConfigError("gene '" + g.name + "' has the wrong kind");
    if (!(g.low < g.high)) throw ConfigError("gene '" + g.name + "' requires low < high");
    validate_field(field, g.low);
    validate_field(field, g.high);
}

/// Search ranges covering every named preset value.
inline std::vector<GeneSpec> default_gene_specs() {
    return {
        {"min_confidence", FieldKind::Real, 0.1, 0.9},
        {"max_dist", FieldKind::Real, 0.1, 0.9},
        {"max_iou_distance", FieldKind::Real, 0.3, 0.9},
        {"nms_max_overlap", FieldKind::Real, 0.3, 1.0},
        {"max_age", FieldKind::Integer, 10, 120},
        {"n_init", FieldKind::Integer, 1, 5},
        {"nn_budget", FieldKind::Integer, 10, 200},
    };
}

struct GAConfig {
    int population_size = 10;
    int max_generations = 50;
    double mutation_rate = 0.1;
    double crossover_rate = 0.7;
    double tolerance = 1e-3;
    std::uint64_t seed = 0;
    int threads = 1;  ///< concurrent fitness evaluations; does not affect results
};

inline void validate(const GAConfig& ga) {
    if (ga.population_size < 2) throw ConfigError("population_size must be >= 2");
    if (ga.max_generations < 1) throw ConfigError("max_generations must be >= 1");
    if (!(ga.mutation_rate >= 0.0 && ga.mutation_rate <= 1.0)) throw ConfigError("mutation_rate must be in [0, 1]");
    if (!(ga.crossover_rate >= 0.0 && ga.crossover_rate <= 1.0)) throw ConfigError("crossover_rate must be in [0, 1]");
    if (!(ga.tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
    if (ga.threads < 1) throw ConfigError("threads must be >= 1");
}

struct GenerationStats {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct GAState {
    int generation = 0;
    std::vector<TrackerConfig> population;
    std::vector<double> scores;
    TrackerConfig best_config;
    double best_score = -std::numeric_limits<double>::infinity();
};

struct GAResult {
    TrackerConfig best;
    double score = 0.0;
    std::vector<GenerationStats> history;
};

using FitnessFn = std::function<double(const TrackerConfig&)>;
using Rng = std::mt19937_64;

inline double sample_gene(const GeneSpec& g, Rng& rng) {
    if (g.kind == FieldKind::Integer) {
        std::uniform_int_distribution<long long> d(std::llround(g.low), std::llround(g.high));
        return static_cast<double>(d(rng));
    }
    std::uniform_real_distribution<double> d(g.low, g.high);
    return d(rng);
}

/// Genes not listed in `specs` keep the value from `base`.
inline std::vector<TrackerConfig> initialize_population(std::span<const GeneSpec> specs,
                                                        const GAConfig& ga, Rng& rng,
                                                        const TrackerConfig& base = {}) {
    std::vector<TrackerConfig> pop;
    pop.reserve(ga.population_size);
    for (int i = 0; i < ga.population_size; ++i) {
        TrackerConfig c = base;
        for (const auto& g : specs) set_field(c, config_field(g.name), sample_gene(g, rng));
        pop.push_back(c);
    }
    return pop;
}

/// Size-2 tournaments with replacement; the first drawn wins ties.
inline std::vector<std::pair<int, int>> select_parents(const GAState& state, Rng& rng) {
    const int n = static_cast<int>(state.population.size());
    std::uniform_int_distribution<int> pick(0, n - 1);
    auto tournament = [&] {
        const int a = pick(rng);
        const int b = pick(rng);
        return state.scores[b] > state.scores[a] ? b : a;
    };
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < (n + 1) / 2; ++k) {
        const int p1 = tournament();
        const int p2 = tournament();
        pairs.emplace_back(p1, p2);
    }
    return pairs;
}

/// With probability `rate`, each gene of child 1 comes from `a` or `b` with
/// equal odds and child 2 takes the other; otherwise the children are copies.
inline std::pair<TrackerConfig, TrackerConfig> crossover(const TrackerConfig& a, const TrackerConfig& b,
                                                         double rate, std::span<const GeneSpec> specs,
                                                         Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrackerConfig c1 = a, c2 = b;
    if (u(rng) < rate) {
        for (const auto& g : specs) {
            if (u(rng) < 0.5) {
                const auto& f = config_field(g.name);
                set_field(c1, f, get_field(b, f));
                set_field(c2, f, get_field(a, f));
            }
        }
    }
    return {c1, c2};
}

/// Each gene is redrawn from its range with probability `rate`.
inline TrackerConfig mutate(const TrackerConfig& individual, double rate,
                            std::span<const GeneSpec> specs, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrackerConfig out = individual;
    for (const auto& g : specs) {
        if (u(rng) < rate) set_field(out, config_field(g.name), sample_gene(g, rng));
    }
    return out;
}

/// Score of the report averaged over all sub-scenes. Tracking or metric
/// failures yield -infinity.
inline double evaluate_fitness(const TrackerConfig& config, std::span<const Sequence> sequences) {
    try {
        std::vector<EvalReport> reports;
        for (const auto& seq : sequences) {
            const auto results = run_sequence(seq.detections, config, seq.frame_count);
            const auto pred = to_tracked_boxes(results);
            reports.push_back(evaluate(seq.gt, pred));
        }
        return score(average_reports(reports));
    } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

namespace detail {

inline std::vector<double> evaluate_population(std::span<const TrackerConfig> pop,
                                               const FitnessFn& fitness, int threads) {
    std::vector<double> scores(pop.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < pop.size(); ++i) scores[i] = fitness(pop[i]);
        return scores;
    }
    std::vector<std::future<void>> jobs;
    for (int t = 0; t < threads; ++t) {
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < pop.size(); i += threads) scores[i] = fitness(pop[i]);
        }));
    }
    for (auto& j : jobs) j.get();
    return scores;
}

inline GenerationStats stats(int generation, std::span<const double> scores) {
    GenerationStats s;
    s.generation = generation;
    s.best = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double v : scores) sum += v;
    s.mean = sum / static_cast<double>(scores.size());
    double var = 0.0;
    for (double v : scores) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / static_cast<double>(scores.size()));
    if (!std::isfinite(s.std)) s.std = std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace detail

/**
 * Generational GA without elitism. Each generation is evaluated, then
 * replaced by crossed-over and mutated offspring of tournament-selected
 * parents. Stops once the population's score standard deviation is within
 * `tolerance` or `max_generations` populations have been evaluated, and
 * returns the best individual ever evaluated.
 *
 * `initial` replaces random initialization when given.
 */
inline GAResult run_ga(std::span<const GeneSpec> specs, const GAConfig& ga, const FitnessFn& fitness,
                       const TrackerConfig& base = {},
                       std::optional<std::vector<TrackerConfig>> initial = std::nullopt) {
    validate(ga);
    for (const auto& g : specs) validate(g);
    Rng rng(ga.seed);

    GAState state;
    state.population = initial ? *initial : initialize_population(specs, ga, rng, base);
    if (static_cast<int>(state.population.size()) < 2) throw ConfigError("population needs >= 2 individuals");
    const std::size_t pop_size = state.population.size();

    GAResult result;
    auto absorb = [&] {
        state.scores = detail::evaluate_population(state.population, fitness, ga.threads);
        ++state.generation;
        for (std::size_t i = 0; i < pop_size; ++i) {
            if (state.scores[i] > state.best_score) {
                state.best_score = state.scores[i];
                state.best_config = state.population[i];
            }
        }
        result.history.push_back(detail::stats(state.generation, state.scores));
    };

    absorb();
    if (!(state.best_score > -std::numeric_limits<double>::infinity())) state.best_config = state.population.front();
    while (!(result.history.back().std <= ga.tolerance) && state.generation < ga.max_generations) {
        const auto pairs = select_parents(state, rng);
        std::vector<TrackerConfig> offspring;
        offspring.reserve(pop_size + 1);
        for (auto [p1, p2] : pairs) {
            auto [c1, c2] = crossover(state.population[p1], state.population[p2], ga.crossover_rate, specs, rng);
            offspring.push_back(mutate(c1, ga.mutation_rate, specs, rng));
            offspring.push_back(mutate(c2, ga.mutation_rate, specs, rng));
        }
        offspring.resize(pop_size);
        state.population = std::move(offspring);
        absorb();
    }
    result.best = state.best_config;
    result.score = state.best_score;
    return result;
}

}  // namespace mttsort
