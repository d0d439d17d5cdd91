// Bootstrap ensembles, HPC-distribution sweeps, and summary statistics.
//
// Every ensemble is a pure function of (config, trace count): traces run on a
// worker pool but land in slots indexed by trace_id, and aggregation is an
// ordered reduction, so results are bit-identical for any worker count.
#pragma once

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "gridspin/dispatch.hpp"
#include "gridspin/model.hpp"
#include "gridspin/traces.hpp"

namespace gridspin {

// Per-trace aggregates.
struct TraceStats {
    double coe_usd_per_mwh = 0.0;      // energy dollars / delivered MWh
    double energy_cost_usd = 0.0;
    double delivered_mwh = 0.0;
    double curtailed_mean_mw = 0.0;
    double curtailed_total_mwh = 0.0;
    double gas_mean_mw = 0.0;
    double gas_peak_mw = 0.0;
    double compute_served_mwh = 0.0;
    double compute_arrivals_mwh = 0.0;
    double compute_shed_mwh = 0.0;
    double final_queue_mwh = 0.0;
    double market_payment_usd = 0.0;
    double total_cost_usd = 0.0;       // market payments, or energy cost when off
    bool unit_cost_defined = false;
    double unit_cost_usd_per_mwh = 0.0;
};

// Mean with a normal-approximation 95% confidence half-width.
struct Ci {
    double mean = 0.0;
    double half_width95 = 0.0;
    double stddev = 0.0;
    int n = 0;
};

inline Ci make_ci(const std::vector<double>& xs) {
    Ci ci;
    ci.n = static_cast<int>(xs.size());
    if (ci.n == 0) return ci;
    double sum = 0.0;
    for (double x : xs) sum += x;
    ci.mean = sum / ci.n;
    if (ci.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - ci.mean) * (x - ci.mean);
        ci.stddev = std::sqrt(ss / (ci.n - 1));
        ci.half_width95 = 1.96 * ci.stddev / std::sqrt(static_cast<double>(ci.n));
    }
    return ci;
}

struct MetricsSummary {
    int n_traces = 0;
    Ci coe;
    Ci curtailed_mw;       // time-mean curtailed MW per trace
    Ci curtailed_mwh;      // total curtailed MWh per trace
    Ci curtail_after_hpc_mw;
    Ci gas_mean_mw;
    Ci gas_peak_mw;
    Ci compute_served_mwh;
    Ci total_cost_usd;
    Ci unit_cost;          // over traces with nonzero compute served
    bool unit_cost_defined = false;
};

// Ensemble-mean time series, for figure reproduction.
struct SeriesMeans {
    std::vector<double> local_demand_mw;
    std::vector<double> renewable_availability_mw;
    std::vector<double> gas_output_mw;
    std::vector<double> curtailed_mw;
    std::vector<double> compute_served_mw;
    std::vector<double> price_usd_per_mwh;
    std::vector<double> queue_mw;
};

struct EnsembleResult {
    MetricsSummary summary;
    std::vector<TraceStats> per_trace;
    SeriesMeans series;
};

inline TraceStats trace_stats(const ScenarioConfig& cfg, const Trace& trace,
                              const TraceRun& run) {
    const double hours = cfg.step_hours();
    const int m = cfg.node_count();
    TraceStats s;
    double curtailed_sum_mw = 0.0;
    for (const auto& rec : run.dispatch) {
        double step_curtailed = 0.0, step_local = 0.0, step_compute = 0.0;
        for (int n = 0; n < m; ++n) {
            step_curtailed += rec.curtailed_mw[n];
            step_local += rec.local_served_mw[n];
            step_compute += rec.compute_placed_mw[n];
        }
        curtailed_sum_mw += step_curtailed;
        s.energy_cost_usd += rec.energy_cost_usd;
        s.delivered_mwh += (step_local + step_compute) * hours;
        s.compute_served_mwh += step_compute * hours;
        s.gas_mean_mw += rec.gas_output_mw;
        s.gas_peak_mw = std::max(s.gas_peak_mw, rec.gas_output_mw);
    }
    const int steps = static_cast<int>(run.dispatch.size());
    if (steps > 0) {
        s.gas_mean_mw /= steps;
        s.curtailed_mean_mw = curtailed_sum_mw / steps;
    }
    s.curtailed_total_mwh = curtailed_sum_mw * hours;
    s.coe_usd_per_mwh = s.delivered_mwh > 0 ? s.energy_cost_usd / s.delivered_mwh : 0.0;

    for (double a : trace.compute_arrivals_mw) s.compute_arrivals_mwh += a * hours;
    if (cfg.market_enabled) {
        for (const auto& o : run.market) s.market_payment_usd += o.payment_usd * hours;
        if (!run.market.empty())
            s.final_queue_mwh = run.market.back().queue_after_mw * hours;
    } else if (!run.dispatch.empty() &&
               cfg.market.excess_policy == ExcessPolicy::rollover) {
        s.final_queue_mwh = run.dispatch.back().unserved_compute_mw * hours;
    }
    if (cfg.market.excess_policy == ExcessPolicy::shed) {
        for (const auto& rec : run.dispatch)
            s.compute_shed_mwh += rec.unserved_compute_mw * hours;
    }

    s.total_cost_usd = cfg.market_enabled ? s.market_payment_usd : s.energy_cost_usd;
    if (s.compute_served_mwh > 0.0) {
        s.unit_cost_defined = true;
        s.unit_cost_usd_per_mwh = s.total_cost_usd / s.compute_served_mwh;
    }
    return s;
}

namespace detail {

struct TraceSeries {
    std::vector<double> local_demand, renew_avail, gas, curtailed, served, price,
        queue;
};

inline TraceSeries extract_series(const ScenarioConfig& cfg, const Trace& trace,
                                  const TraceRun& run) {
    const int m = cfg.node_count();
    const int steps = static_cast<int>(run.dispatch.size());
    TraceSeries ts;
    ts.local_demand.resize(steps);
    ts.renew_avail.resize(steps);
    ts.gas.resize(steps);
    ts.curtailed.resize(steps);
    ts.served.resize(steps);
    ts.price.assign(steps, 0.0);
    ts.queue.assign(steps, 0.0);
    for (int t = 0; t < steps; ++t) {
        const auto& rec = run.dispatch[t];
        double dem = 0.0, ren = 0.0, cur = 0.0, srv = 0.0;
        for (int n = 0; n < m; ++n) {
            dem += trace.local_demand_mw[n][t];
            ren += trace.renewable_availability_mw[n][t];
            cur += rec.curtailed_mw[n];
            srv += rec.compute_placed_mw[n];
        }
        ts.local_demand[t] = dem;
        ts.renew_avail[t] = ren;
        ts.gas[t] = rec.gas_output_mw;
        ts.curtailed[t] = cur;
        ts.served[t] = srv;
        if (cfg.market_enabled) {
            ts.price[t] = run.market[t].price;
            ts.queue[t] = run.market[t].queue_after_mw;
        } else if (cfg.market.excess_policy == ExcessPolicy::rollover) {
            ts.queue[t] = rec.unserved_compute_mw;
        }
    }
    return ts;
}

// Runs fn(i) for i in [0, n) on `jobs` workers. Each index writes only its
// own slot, so scheduling cannot affect results.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int count = std::min(jobs, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace detail

inline int default_jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs trace_ids 0..n_traces-1 and aggregates. Deterministic given cfg.
inline EnsembleResult run_ensemble(const ScenarioConfig& cfg, int n_traces,
                                   int jobs = 0) {
    if (jobs <= 0) jobs = default_jobs();
    std::vector<TraceStats> stats(n_traces);
    std::vector<detail::TraceSeries> series(n_traces);
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};

    detail::parallel_for(n_traces, jobs, [&](int i) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            const Trace trace = gen_trace(cfg, i);
            const TraceRun run = run_trace(cfg, trace);
            stats[i] = trace_stats(cfg, trace, run);
            series[i] = detail::extract_series(cfg, trace, run);
        } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
        }
    });
    if (failed) std::rethrow_exception(first_error);

    EnsembleResult result;
    result.per_trace = std::move(stats);

    auto collect = [&](auto proj) {
        std::vector<double> xs;
        xs.reserve(n_traces);
        for (const auto& s : result.per_trace) xs.push_back(proj(s));
        return make_ci(xs);
    };
    MetricsSummary& sum = result.summary;
    sum.n_traces = n_traces;
    sum.coe = collect([](const TraceStats& s) { return s.coe_usd_per_mwh; });
    sum.curtailed_mw = collect([](const TraceStats& s) { return s.curtailed_mean_mw; });
    sum.curtailed_mwh = collect([](const TraceStats& s) { return s.curtailed_total_mwh; });
    sum.curtail_after_hpc_mw = sum.curtailed_mw;
    sum.gas_mean_mw = collect([](const TraceStats& s) { return s.gas_mean_mw; });
    sum.gas_peak_mw = collect([](const TraceStats& s) { return s.gas_peak_mw; });
    sum.compute_served_mwh =
        collect([](const TraceStats& s) { return s.compute_served_mwh; });
    sum.total_cost_usd = collect([](const TraceStats& s) { return s.total_cost_usd; });
    {
        std::vector<double> xs;
        for (const auto& s : result.per_trace)
            if (s.unit_cost_defined) xs.push_back(s.unit_cost_usd_per_mwh);
        sum.unit_cost = make_ci(xs);
        sum.unit_cost_defined = !xs.empty();
    }

    const int steps = cfg.horizon_steps;
    auto mean_of = [&](auto member) {
        std::vector<double> out(steps, 0.0);
        for (const auto& ts : series)
            for (int t = 0; t < steps; ++t) out[t] += (ts.*member)[t];
        for (double& v : out) v /= n_traces;
        return out;
    };
    result.series.local_demand_mw = mean_of(&detail::TraceSeries::local_demand);
    result.series.renewable_availability_mw = mean_of(&detail::TraceSeries::renew_avail);
    result.series.gas_output_mw = mean_of(&detail::TraceSeries::gas);
    result.series.curtailed_mw = mean_of(&detail::TraceSeries::curtailed);
    result.series.compute_served_mw = mean_of(&detail::TraceSeries::served);
    result.series.price_usd_per_mwh = mean_of(&detail::TraceSeries::price);
    result.series.queue_mw = mean_of(&detail::TraceSeries::queue);
    return result;
}

// Reshapes compute capacity for one sweep point.
//   additive:       every renewable node gets `level` MW of HPC; the slack
//                   node keeps its base capacity.
//   constant-total: every renewable node gets `level` MW; the slack node gets
//                   the remainder of the base system total.
inline ScenarioConfig apply_distribution_level(const ScenarioConfig& base,
                                               double level_mw, SweepMode mode) {
    ScenarioConfig cfg = base;
    if (level_mw < 0) throw ScenarioError("distribution level must be >= 0");
    const auto renewables = cfg.renewable_nodes();
    if (mode == SweepMode::additive) {
        for (int id : renewables) cfg.nodes[id].compute_capacity_mw = level_mw;
    } else {
        const double total = base.total_compute_capacity_mw();
        const double at_renewables = level_mw * static_cast<double>(renewables.size());
        if (at_renewables > total)
            throw ScenarioError(
                "constant-total sweep infeasible: " + std::to_string(at_renewables) +
                " MW at renewable nodes exceeds system total " + std::to_string(total));
        for (int id : renewables) cfg.nodes[id].compute_capacity_mw = level_mw;
        const auto slack = cfg.dispatchable_nodes();
        if (slack.empty())
            throw ScenarioError("constant-total sweep requires a dispatchable node");
        for (std::size_t i = 0; i < slack.size(); ++i)
            cfg.nodes[slack[i]].compute_capacity_mw =
                i == 0 ? total - at_renewables : 0.0;
    }
    return cfg;
}

// One ensemble per distribution level, on identical traces.
inline std::vector<std::pair<double, EnsembleResult>> sweep_distribution(
    const ScenarioConfig& base, const std::vector<double>& levels_mw,
    SweepMode mode, int n_traces, int jobs = 0) {
    std::vector<std::pair<double, EnsembleResult>> table;
    table.reserve(levels_mw.size());
    for (double level : levels_mw) {
        ScenarioConfig cfg = apply_distribution_level(base, level, mode);
        table.emplace_back(level, run_ensemble(cfg, n_traces, jobs));
    }
    return table;
}

// Divides each group by its own maximum, mapping the max to 1.0.
inline std::vector<std::vector<double>> normalize_by_max(
    const std::vector<std::vector<double>>& groups) {
    std::vector<std::vector<double>> out;
    out.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double mx = 0.0;
        for (double v : groups[g]) mx = std::max(mx, v);
        if (mx <= 0.0)
            throw DegenerateError("normalize_by_max: group " + std::to_string(g) +
                                  " has no positive value");
        std::vector<double> row;
        row.reserve(groups[g].size());
        for (double v : groups[g]) row.push_back(v / mx);
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace gridspin
