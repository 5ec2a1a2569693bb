#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace mttsort {

/// Lexicographic assignment cost: fewer `penalty` units first, then smaller
/// `cost`, then smaller `tie`. Forms an ordered abelian group, so the
/// Hungarian potentials work on it unchanged.
template <typename T>
struct LexCost {
    std::int64_t penalty = 0;
    T cost{};
    std::int64_t tie = 0;

    friend LexCost operator+(const LexCost& a, const LexCost& b) {
        return {a.penalty + b.penalty, a.cost + b.cost, a.tie + b.tie};
    }
    friend LexCost operator-(const LexCost& a, const LexCost& b) {
        return {a.penalty - b.penalty, a.cost - b.cost, a.tie - b.tie};
    }
    friend bool operator<(const LexCost& a, const LexCost& b) {
        if (a.penalty != b.penalty) return a.penalty < b.penalty;
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.tie < b.tie;
    }
    friend bool operator==(const LexCost&, const LexCost&) = default;

    static LexCost infinity() { return {std::numeric_limits<std::int64_t>::max() / 4, T{}, 0}; }
};

/**
 * Minimum-cost perfect assignment on a square n x n matrix (Hungarian method
 * with potentials, O(n^3)). `cost(i, j)` must return a value of an ordered
 * additive group. Returns `col_of_row`.
 */
template <typename Cost, typename CostFn>
std::vector<int> hungarian(int n, CostFn&& cost) {
    if (n == 0) return {};
    const Cost inf = Cost::infinity();
    // 1-based arrays; row 0 / column 0 are the virtual start.
    std::vector<Cost> u(n + 1), v(n + 1);
    std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        int j0 = 0;
        std::vector<Cost> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = row_of_col[j0];
            Cost delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const Cost cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] = u[row_of_col[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col_of_row(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (row_of_col[j] != 0) col_of_row[row_of_col[j] - 1] = j - 1;
    }
    return col_of_row;
}

/**
 * Tie-break weights so that, among otherwise equal assignments, the one whose
 * per-row column sequence (unmatched = `cols`) is lexicographically smallest
 * wins: lower rows are matched first, each to its lowest possible column.
 * Returns an empty matrix when the weights would overflow, in which case ties
 * resolve by the solver's fixed visiting order.
 */
inline std::vector<std::vector<std::int64_t>> tie_weights(int rows, int cols) {
    // Row weights are (cols + 1)^(rows - 1 - i); need (cols + 1)^rows to fit.
    const std::int64_t base = cols + 1;
    std::int64_t limit = 1;
    for (int i = 0; i < rows; ++i) {
        if (limit > std::numeric_limits<std::int64_t>::max() / 4 / base) return {};
        limit *= base;
    }
    std::vector<std::vector<std::int64_t>> w(rows, std::vector<std::int64_t>(cols, 0));
    std::int64_t row_weight = limit / base;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) w[i][j] = static_cast<std::int64_t>(j - cols) * row_weight;
        row_weight /= base;
    }
    return w;
}

/**
 * Maximum-cardinality, then minimum-cost, one-to-one matching between rows
 * and columns. `feasible(i, j)` says whether the pair may be matched,
 * `cost(i, j)` gives its cost. Remaining ties go to the lexicographically
 * lowest (row, column) sequence. Returns `col_of_row` with -1 for unmatched
 * rows.
 */
template <typename T, typename FeasibleFn, typename CostFn>
std::vector<int> max_matching_min_cost(int rows, int cols, FeasibleFn&& feasible, CostFn&& cost) {
    std::vector<int> result(rows, -1);
    if (rows == 0 || cols == 0) return result;
    const int n = std::max(rows, cols);
    const auto ties = tie_weights(rows, cols);
    using Key = LexCost<T>;
    // Precompute so the solver touches each entry in O(1).
    std::vector<Key> keys(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Key k{};
            if (i < rows && j < cols) {
                if (feasible(i, j)) {
                    k.cost = cost(i, j);
                    if (!ties.empty()) k.tie = ties[i][j];
                } else {
                    k.penalty = 1;
                }
            }
            keys[static_cast<std::size_t>(i) * n + j] = k;
        }
    }
    const auto assignment = hungarian<Key>(n, [&](int i, int j) { return keys[static_cast<std::size_t>(i) * n + j]; });
    for (int i = 0; i < rows; ++i) {
        const int j = assignment[i];
        if (j >= 0 && j < cols && feasible(i, j)) result[i] = j;
    }
    return result;
}

}  // namespace mttsort
