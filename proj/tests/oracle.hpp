// Test-only oracles, independent of the implementation paths they check.
//
//  - enumerate_min_cost: exhaustive integer enumeration of energy-to-compute
//    assignments, for validating the greedy placement on small instances.
//  - grid_search_objective: fine-grid scan of the price-selection objective,
//    for validating select_price.
#pragma once

#include <limits>
#include <vector>

#include "gridspin/market.hpp"

namespace gridspin::test {

struct EnumInstance {
    std::vector<int> supply;           // per source, MW
    std::vector<double> source_cost;   // $/MWh
    std::vector<int> sink_cap;         // per sink, MW
    std::vector<std::vector<double>> pair_cost; // delivered cost source x sink
    int demand = 0;
};

namespace detail {

inline void enumerate_rec(const EnumInstance& inst, std::size_t cell,
                          std::vector<int>& supply_left, std::vector<int>& cap_left,
                          int remaining, double cost_so_far, double& best) {
    if (cost_so_far >= best) return;
    if (remaining == 0) {
        best = cost_so_far;
        return;
    }
    const std::size_t n_src = inst.supply.size();
    const std::size_t n_snk = inst.sink_cap.size();
    if (cell >= n_src * n_snk) return;

    // Feasibility prune: the untouched cells must be able to carry `remaining`.
    int reachable = 0;
    for (std::size_t c = cell; c < n_src * n_snk; ++c) {
        const std::size_t i = c / n_snk;
        const std::size_t j = c % n_snk;
        reachable += std::min(supply_left[i], cap_left[j]);
        if (reachable >= remaining) break;
    }
    if (reachable < remaining) return;

    const std::size_t i = cell / n_snk;
    const std::size_t j = cell % n_snk;
    const int q_max = std::min({supply_left[i], cap_left[j], remaining});
    for (int q = q_max; q >= 0; --q) {
        supply_left[i] -= q;
        cap_left[j] -= q;
        enumerate_rec(inst, cell + 1, supply_left, cap_left, remaining - q,
                      cost_so_far + q * inst.pair_cost[i][j], best);
        supply_left[i] += q;
        cap_left[j] += q;
    }
}

} // namespace detail

// Minimum total cost over every integer assignment that serves the maximum
// servable quantity min(demand, total supply, total sink capacity).
inline double enumerate_min_cost(const EnumInstance& inst) {
    int total_supply = 0, total_cap = 0;
    for (int s : inst.supply) total_supply += s;
    for (int c : inst.sink_cap) total_cap += c;
    const int target = std::min({inst.demand, total_supply, total_cap});
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> supply_left = inst.supply;
    std::vector<int> cap_left = inst.sink_cap;
    detail::enumerate_rec(inst, 0, supply_left, cap_left, target, 0.0, best);
    return best;
}

// Minimum of the price-selection objective over the grid {0, step, 2*step, ...}
// spanning [0, theta].
inline double grid_search_objective(const std::vector<SupplyCurve>& curves,
                                    double d, double theta, double step = 0.01) {
    double best = std::numeric_limits<double>::infinity();
    const long n = static_cast<long>(theta / step) + 1;
    for (long i = 0; i <= n; ++i) {
        const double p = std::min(i * step, theta);
        best = std::min(best, eval_objective(p, curves, d, theta));
    }
    return best;
}

} // namespace gridspin::test
