// Shared test fixtures.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridspin/dispatch.hpp"
#include "gridspin/model.hpp"
#include "gridspin/traces.hpp"

namespace gridspin::test {

// The 3-node system used throughout: solar $10, wind $20, gas $50 slack,
// flat $40 transport, 100 MW HPC at the gas node.
inline ScenarioConfig three_node_config() {
    ScenarioConfig cfg;
    cfg.name = "test3";
    cfg.nodes = {
        Node{0, "solar", NodeKind::solar, 150.0, 0.0, 10.0, 0.0, false},
        Node{1, "wind", NodeKind::wind, 150.0, 0.0, 20.0, 0.0, false},
        Node{2, "gas", NodeKind::gas, 500.0, 100.0, 50.0, 0.9, true},
    };
    cfg.transport = TransportCostMatrix::flat(3, 40.0);
    cfg.walk_sigma_mw = 5.0;
    cfg.step_minutes = 5.0;
    cfg.horizon_steps = 288;
    cfg.initial_demand_mw = {40.0, 40.0, 40.0};
    cfg.initial_generation_mw = {75.0, 75.0, 0.0};
    cfg.local_demand_max_mw = 160.0;
    cfg.initial_compute_demand_mw = 100.0;
    cfg.compute_arrivals_max_mw = 100.0;
    cfg.master_seed = 42;
    return cfg;
}

inline ScenarioConfig three_node_config_b() {
    ScenarioConfig cfg = three_node_config();
    cfg.name = "test3b";
    cfg.nodes[0].compute_capacity_mw = 33.0;
    cfg.nodes[1].compute_capacity_mw = 33.0;
    return cfg;
}

// Independent conservation checks over a finished trace run.
struct BalanceReport {
    double max_node_imbalance_mw = 0.0;    // energy balance per node per step
    double max_compute_imbalance_mw = 0.0; // placed + unserved vs demand
    double max_capacity_excess_mw = 0.0;   // placed beyond compute capacity
    double max_cost_error_usd = 0.0;       // recomputed vs recorded step cost
};

inline BalanceReport check_balance(const ScenarioConfig& cfg, const TraceRun& run) {
    BalanceReport rep;
    const int m = cfg.node_count();
    const double hours = cfg.step_hours();
    for (const auto& rec : run.dispatch) {
        double placed_total = 0.0;
        double cost = 0.0;
        for (int n = 0; n < m; ++n) {
            double inflow = rec.generation_mw[n];
            double outflow = rec.local_served_mw[n] + rec.compute_placed_mw[n] +
                             rec.curtailed_mw[n];
            for (const auto& tr : rec.transfers) {
                if (tr.to_node == n) inflow += tr.quantity_mw;
                if (tr.from_node == n) outflow += tr.quantity_mw;
            }
            rep.max_node_imbalance_mw =
                std::max(rep.max_node_imbalance_mw, std::abs(inflow - outflow));
            placed_total += rec.compute_placed_mw[n];
            rep.max_capacity_excess_mw =
                std::max(rep.max_capacity_excess_mw,
                         rec.compute_placed_mw[n] - cfg.nodes[n].compute_capacity_mw);
            const double used = cfg.nodes[n].dispatchable
                                    ? rec.generation_mw[n]
                                    : rec.generation_mw[n] - rec.curtailed_mw[n];
            cost += used * cfg.nodes[n].energy_cost_usd_per_mwh * hours;
        }
        for (const auto& tr : rec.transfers)
            cost += tr.quantity_mw * tr.transport_cost_usd_per_mwh * hours;
        rep.max_compute_imbalance_mw = std::max(
            rep.max_compute_imbalance_mw,
            std::abs(placed_total + rec.unserved_compute_mw - rec.compute_demand_mw));
        rep.max_cost_error_usd =
            std::max(rep.max_cost_error_usd, std::abs(cost - rec.energy_cost_usd));
    }
    return rep;
}

} // namespace gridspin::test
