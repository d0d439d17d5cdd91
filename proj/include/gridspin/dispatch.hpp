// Per-timestep dispatch: serve local electrical demand at minimum cost, then
// place the system compute load onto the cheapest (energy, compute-capacity)
// pairs, with the dispatchable plant acting as slack throughout.
#pragma once

#include <algorithm>
#include <vector>

#include "gridspin/market.hpp"
#include "gridspin/model.hpp"
#include "gridspin/traces.hpp"

namespace gridspin {

enum class FlowPurpose { local_demand, compute };

struct Transfer {
    int from_node = 0;
    int to_node = 0;
    double quantity_mw = 0.0;
    double transport_cost_usd_per_mwh = 0.0;
    FlowPurpose purpose = FlowPurpose::local_demand;
};

// Everything that happened in one timestep.
struct DispatchRecord {
    int t = 0;
    std::vector<double> generation_mw;     // renewable availability / slack output
    std::vector<double> local_served_mw;   // per node, self-serve plus imports
    std::vector<double> compute_placed_mw; // per node
    std::vector<double> curtailed_mw;      // per node, zero for dispatchables
    std::vector<Transfer> transfers;
    double gas_output_mw = 0.0;        // total dispatchable output
    double compute_demand_mw = 0.0;    // arrivals plus rollover queue
    double unserved_compute_mw = 0.0;
    double energy_cost_usd = 0.0;      // generation + transport dollars this step
};

// Snapshot of one node mid-dispatch, for excess bookkeeping.
struct NodeState {
    bool dispatchable = false;
    double energy_capacity_mw = 0.0;
    double availability_mw = 0.0;    // stochastic generation (renewables)
    double local_demand_mw = 0.0;
    double committed_mw = 0.0;       // output already committed (dispatchables)
    double compute_capacity_mw = 0.0;
    double compute_placed_mw = 0.0;
};

struct Excess {
    double energy_mw = 0.0;
    double compute_mw = 0.0;
};

// Excess energy is what a node could still export: unused availability for
// renewables, uncommitted capacity for the slack plant.
inline Excess compute_excess(const NodeState& s) {
    Excess e;
    e.energy_mw = s.dispatchable
                      ? s.energy_capacity_mw - s.committed_mw
                      : std::max(s.availability_mw - s.local_demand_mw, 0.0);
    e.compute_mw = std::max(s.compute_capacity_mw - s.compute_placed_mw, 0.0);
    return e;
}

namespace detail {

struct GreedySource {
    int node = 0;
    double available_mw = 0.0;
    double cost_usd_per_mwh = 0.0;
    double carbon = 0.0;
};

struct GreedySink {
    int node = 0;
    double capacity_mw = 0.0;
};

struct GreedyFlow {
    int from = 0;
    int to = 0;
    double quantity_mw = 0.0;
};

struct GreedyResult {
    std::vector<GreedyFlow> flows;
    double delivered_mw = 0.0;
    double unserved_mw = 0.0;
    double cost_usd_per_h = 0.0; // dollars at hourly rate
};

// Cost-ordered allocation: walk (source, sink) pairs by ascending delivered
// cost until demand is met or no pair with positive excess remains. Ties
// break toward lower carbon intensity, then lower node id. Pairs whose
// delivered cost exceeds `cost_ceiling` are not offered at all.
inline GreedyResult greedy_allocate(std::vector<GreedySource> sources,
                                    std::vector<GreedySink> sinks,
                                    const TransportCostMatrix& transport,
                                    double demand_mw,
                                    double cost_ceiling =
                                        std::numeric_limits<double>::infinity()) {
    struct Pair {
        double cost;
        double carbon;
        int src_idx;
        int dst_idx;
    };
    std::vector<Pair> pairs;
    pairs.reserve(sources.size() * sinks.size());
    for (std::size_t s = 0; s < sources.size(); ++s)
        for (std::size_t d = 0; d < sinks.size(); ++d) {
            const double cost = sources[s].cost_usd_per_mwh +
                                transport.at(sources[s].node, sinks[d].node);
            if (cost <= cost_ceiling)
                pairs.push_back({cost, sources[s].carbon, static_cast<int>(s),
                                 static_cast<int>(d)});
        }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.carbon != b.carbon) return a.carbon < b.carbon;
        const int an = sources[a.src_idx].node, bn = sources[b.src_idx].node;
        if (an != bn) return an < bn;
        return sinks[a.dst_idx].node < sinks[b.dst_idx].node;
    });

    GreedyResult result;
    double remaining = demand_mw;
    for (const Pair& p : pairs) {
        if (remaining <= 0.0) break;
        auto& src = sources[p.src_idx];
        auto& dst = sinks[p.dst_idx];
        const double q = std::min({src.available_mw, dst.capacity_mw, remaining});
        if (q <= 0.0) continue;
        src.available_mw -= q;
        dst.capacity_mw -= q;
        remaining -= q;
        result.delivered_mw += q;
        result.cost_usd_per_h += q * p.cost;
        result.flows.push_back({src.node, dst.node, q});
    }
    result.unserved_mw = std::max(remaining, 0.0);
    return result;
}

} // namespace detail

// Result of serving local electrical demand at one timestep.
struct LocalServeResult {
    std::vector<double> local_served_mw;  // self-serve plus imports, per node
    std::vector<double> excess_mw;        // exportable renewable excess, per node
    std::vector<double> slack_headroom_mw; // per node, zero for renewables
    std::vector<double> slack_output_mw;  // per node, zero for renewables
    std::vector<Transfer> transfers;
    double cost_usd_per_h = 0.0;
};

// Each node first serves its own demand from its own generation (the slack
// plant counts as its node's generation). Remaining shortfalls are served
// from other nodes in ascending delivered cost, slack covering the residual.
inline LocalServeResult serve_local_demand(const ScenarioConfig& cfg,
                                           const std::vector<double>& availability_mw,
                                           const std::vector<double>& demand_mw) {
    const int m = cfg.node_count();
    LocalServeResult r;
    r.local_served_mw.assign(m, 0.0);
    r.excess_mw.assign(m, 0.0);
    r.slack_headroom_mw.assign(m, 0.0);
    r.slack_output_mw.assign(m, 0.0);

    std::vector<double> deficit(m, 0.0);
    for (int n = 0; n < m; ++n) {
        const Node& node = cfg.nodes[n];
        if (node.dispatchable) {
            const double self = std::min(node.energy_capacity_mw, demand_mw[n]);
            r.slack_output_mw[n] = self;
            r.slack_headroom_mw[n] = node.energy_capacity_mw - self;
            r.local_served_mw[n] = self;
            deficit[n] = demand_mw[n] - self;
        } else {
            const double self = std::min(availability_mw[n], demand_mw[n]);
            r.local_served_mw[n] = self;
            r.excess_mw[n] = availability_mw[n] - self;
            deficit[n] = demand_mw[n] - self;
        }
        r.cost_usd_per_h += r.local_served_mw[n] * node.energy_cost_usd_per_mwh;
    }

    double total_deficit = 0.0;
    for (double d : deficit) total_deficit += d;
    if (total_deficit > 0.0) {
        std::vector<detail::GreedySource> sources;
        std::vector<detail::GreedySink> sinks;
        for (int n = 0; n < m; ++n) {
            const Node& node = cfg.nodes[n];
            const double avail = node.dispatchable ? r.slack_headroom_mw[n] : r.excess_mw[n];
            if (avail > 0.0)
                sources.push_back({n, avail, node.energy_cost_usd_per_mwh,
                                   node.carbon_intensity_lb_per_kwh});
            if (deficit[n] > 0.0) sinks.push_back({n, deficit[n]});
        }
        auto g = detail::greedy_allocate(sources, sinks, cfg.transport, total_deficit);
        if (g.unserved_mw > 1e-9)
            throw InfeasibleError(
                "local demand exceeds total generation capability by " +
                std::to_string(g.unserved_mw) + " MW");
        for (const auto& f : g.flows) {
            r.local_served_mw[f.to] += f.quantity_mw;
            if (cfg.nodes[f.from].dispatchable) {
                r.slack_output_mw[f.from] += f.quantity_mw;
                r.slack_headroom_mw[f.from] -= f.quantity_mw;
            } else {
                r.excess_mw[f.from] -= f.quantity_mw;
            }
            r.transfers.push_back({f.from, f.to, f.quantity_mw,
                                   cfg.transport.at(f.from, f.to),
                                   FlowPurpose::local_demand});
        }
        r.cost_usd_per_h += g.cost_usd_per_h;
    }
    return r;
}

// Result of placing compute load after local demand is served.
struct PlacementResult {
    std::vector<double> compute_placed_mw; // per sink node
    std::vector<double> energy_drawn_mw;   // per source node
    std::vector<Transfer> transfers;       // cross-node energy for compute
    double unserved_mw = 0.0;
    double cost_usd_per_h = 0.0;
};

// Assigns compute demand to (energy source, compute sink) pairs in ascending
// delivered cost, up to the low-cost threshold set by the slack plant's
// marginal rate: a pair is only worth using while it undercuts (or ties) the
// slack, so transported slack output is priced out of remote HPC whenever
// transport costs anything. Leftover demand is a result, not an error.
inline PlacementResult place_compute(const ScenarioConfig& cfg,
                                     const std::vector<double>& excess_mw,
                                     const std::vector<double>& slack_headroom_mw,
                                     double compute_demand_mw) {
    const int m = cfg.node_count();
    PlacementResult r;
    r.compute_placed_mw.assign(m, 0.0);
    r.energy_drawn_mw.assign(m, 0.0);

    double slack_rate = -1.0;
    for (const Node& node : cfg.nodes)
        if (node.dispatchable)
            slack_rate = std::max(slack_rate, node.energy_cost_usd_per_mwh);
    const double cost_ceiling =
        slack_rate < 0 ? std::numeric_limits<double>::infinity() : slack_rate;

    std::vector<detail::GreedySource> sources;
    std::vector<detail::GreedySink> sinks;
    for (int n = 0; n < m; ++n) {
        const Node& node = cfg.nodes[n];
        const double avail = node.dispatchable ? slack_headroom_mw[n] : excess_mw[n];
        if (avail > 0.0)
            sources.push_back({n, avail, node.energy_cost_usd_per_mwh,
                               node.carbon_intensity_lb_per_kwh});
        if (node.compute_capacity_mw > 0.0)
            sinks.push_back({n, node.compute_capacity_mw});
    }
    auto g = detail::greedy_allocate(sources, sinks, cfg.transport,
                                     compute_demand_mw, cost_ceiling);
    for (const auto& f : g.flows) {
        r.compute_placed_mw[f.to] += f.quantity_mw;
        r.energy_drawn_mw[f.from] += f.quantity_mw;
        if (f.from != f.to)
            r.transfers.push_back({f.from, f.to, f.quantity_mw,
                                   cfg.transport.at(f.from, f.to),
                                   FlowPurpose::compute});
    }
    r.unserved_mw = std::max(compute_demand_mw - g.delivered_mw, 0.0);
    r.cost_usd_per_h = g.cost_usd_per_h;
    return r;
}

// Full run over one trace.
struct TraceRun {
    std::vector<DispatchRecord> dispatch;
    std::vector<MarketOutcome> market; // empty when the market is disabled
};

inline TraceRun run_trace(const ScenarioConfig& cfg, const Trace& trace) {
    const int m = cfg.node_count();
    const double hours = cfg.step_hours();
    TraceRun run;
    run.dispatch.reserve(trace.horizon_steps);
    if (cfg.market_enabled) run.market.reserve(trace.horizon_steps);

    std::vector<double> avail(m), demand(m);
    double queue_mw = 0.0; // resets at the start of every trace

    for (int t = 0; t < trace.horizon_steps; ++t) {
        for (int n = 0; n < m; ++n) {
            avail[n] = trace.renewable_availability_mw[n][t];
            demand[n] = trace.local_demand_mw[n][t];
        }
        LocalServeResult local = serve_local_demand(cfg, avail, demand);

        DispatchRecord rec;
        rec.t = t;
        rec.local_served_mw = local.local_served_mw;
        rec.transfers = local.transfers;
        rec.compute_placed_mw.assign(m, 0.0);
        rec.curtailed_mw.assign(m, 0.0);
        rec.generation_mw.assign(m, 0.0);
        rec.compute_demand_mw = trace.compute_arrivals_mw[t] + queue_mw;

        std::vector<double> compute_energy_at_source(m, 0.0);
        double cost_per_h = local.cost_usd_per_h;

        if (cfg.market_enabled) {
            auto curves = build_supply_curves(cfg, local.excess_mw,
                                              local.slack_headroom_mw);
            auto [outcome, queue_out] = step_market(
                queue_mw, trace.compute_arrivals_mw[t], curves, cfg.market, m);
            outcome.t = t;
            queue_mw = queue_out;
            // Market-cleared HPC is powered at its own node; book the energy.
            for (int n = 0; n < m; ++n) {
                const double q = outcome.quantities_mw[n];
                if (q <= 0.0) continue;
                rec.compute_placed_mw[n] = q;
                compute_energy_at_source[n] += q;
                if (cfg.nodes[n].dispatchable) local.slack_output_mw[n] += q;
                cost_per_h += q * cfg.nodes[n].energy_cost_usd_per_mwh;
            }
            rec.unserved_compute_mw = outcome.shortfall_mw;
            run.market.push_back(outcome);
        } else {
            PlacementResult placed = place_compute(cfg, local.excess_mw,
                                                   local.slack_headroom_mw,
                                                   rec.compute_demand_mw);
            rec.compute_placed_mw = placed.compute_placed_mw;
            for (const auto& tr : placed.transfers) rec.transfers.push_back(tr);
            for (int n = 0; n < m; ++n) {
                compute_energy_at_source[n] += placed.energy_drawn_mw[n];
                if (cfg.nodes[n].dispatchable)
                    local.slack_output_mw[n] += placed.energy_drawn_mw[n];
            }
            rec.unserved_compute_mw = placed.unserved_mw;
            cost_per_h += placed.cost_usd_per_h;
            queue_mw = cfg.market.excess_policy == ExcessPolicy::rollover
                           ? placed.unserved_mw
                           : 0.0;
        }

        double gas_total = 0.0;
        for (int n = 0; n < m; ++n) {
            if (cfg.nodes[n].dispatchable) {
                rec.generation_mw[n] = local.slack_output_mw[n];
                gas_total += local.slack_output_mw[n];
            } else {
                rec.generation_mw[n] = avail[n];
                // Used = self-served demand + demand exports + energy drawn
                // for compute (local and exported); the rest is curtailed.
                double used = std::min(avail[n], demand[n]);
                for (const auto& tr : rec.transfers)
                    if (tr.from_node == n && tr.purpose == FlowPurpose::local_demand)
                        used += tr.quantity_mw;
                used += compute_energy_at_source[n];
                rec.curtailed_mw[n] = std::max(avail[n] - used, 0.0);
            }
        }
        rec.gas_output_mw = gas_total;
        rec.energy_cost_usd = cost_per_h * hours;
        run.dispatch.push_back(std::move(rec));
    }
    return run;
}

} // namespace gridspin
