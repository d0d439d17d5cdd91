// CSV artifact writers. All numbers are formatted with %.10g so repeated runs
// of the same configuration produce byte-identical files.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gridspin/dispatch.hpp"
#include "gridspin/metrics.hpp"
#include "gridspin/model.hpp"
#include "gridspin/traces.hpp"

namespace gridspin {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Round-trip exact; used in the dump CSVs so downstream recomputation can
// reproduce totals to machine precision.
inline std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Identifies one summary/series row within a run or sweep.
struct CellKey {
    std::string scenario;
    std::string sweep_mode; // "-" for plain runs
    double level_mw = 0.0;
    std::string market;     // off | merit | plsf
    double theta = 0.0;
    std::string policy;
    int traces = 0;
};

inline std::string summary_csv_header() {
    return "scenario,sweep_mode,level_mw,market,theta_usd_per_mwh,policy,traces,"
           "coe_usd_per_mwh,coe_ci95,curtailed_mean_mw,curtailed_ci95,"
           "curtailed_total_mwh,curtail_after_hpc_mw,curtail_after_hpc_ci95,"
           "gas_mean_mw,gas_mean_ci95,gas_peak_mw,gas_peak_ci95,"
           "compute_served_mwh,compute_served_ci95,total_cost_usd,total_cost_ci95,"
           "unit_cost_usd_per_mwh,unit_cost_ci95";
}

inline std::string summary_csv_row(const CellKey& key, const MetricsSummary& s) {
    std::string row = key.scenario + "," + key.sweep_mode + "," + fmt_g(key.level_mw) +
                      "," + key.market + "," + fmt_g(key.theta) + "," + key.policy +
                      "," + std::to_string(key.traces);
    auto ci = [&](const Ci& c) { row += "," + fmt_g(c.mean) + "," + fmt_g(c.half_width95); };
    ci(s.coe);
    ci(s.curtailed_mw);
    row += "," + fmt_g(s.curtailed_mwh.mean);
    ci(s.curtail_after_hpc_mw);
    ci(s.gas_mean_mw);
    ci(s.gas_peak_mw);
    ci(s.compute_served_mwh);
    ci(s.total_cost_usd);
    if (s.unit_cost_defined)
        ci(s.unit_cost);
    else
        row += ",,";
    return row;
}

inline void write_summary_csv(const std::string& path,
                              const std::vector<std::pair<CellKey, MetricsSummary>>& rows) {
    std::ofstream out(path);
    out << summary_csv_header() << "\n";
    for (const auto& [key, s] : rows) out << summary_csv_row(key, s) << "\n";
}

inline void write_series_csv(const std::string& path,
                             const std::vector<std::pair<CellKey, SeriesMeans>>& cells) {
    std::ofstream out(path);
    out << "scenario,sweep_mode,level_mw,market,theta_usd_per_mwh,policy,t,"
           "mean_local_demand_mw,mean_renewable_availability_mw,mean_gas_output_mw,"
           "mean_curtailed_mw,mean_compute_served_mw,mean_price_usd_per_mwh,"
           "mean_queue_mw\n";
    for (const auto& [key, s] : cells) {
        const std::string prefix = key.scenario + "," + key.sweep_mode + "," +
                                   fmt_g(key.level_mw) + "," + key.market + "," +
                                   fmt_g(key.theta) + "," + key.policy + ",";
        for (std::size_t t = 0; t < s.local_demand_mw.size(); ++t) {
            out << prefix << t << "," << fmt_g(s.local_demand_mw[t]) << ","
                << fmt_g(s.renewable_availability_mw[t]) << ","
                << fmt_g(s.gas_output_mw[t]) << "," << fmt_g(s.curtailed_mw[t]) << ","
                << fmt_g(s.compute_served_mw[t]) << ","
                << fmt_g(s.price_usd_per_mwh[t]) << "," << fmt_g(s.queue_mw[t])
                << "\n";
        }
    }
}

// Golden-file trace dump: one row per (trace, t, channel, node).
inline void dump_traces_csv(std::ofstream& out, const ScenarioConfig& cfg,
                            const Trace& trace, bool header) {
    if (header) out << "trace_id,t,channel,node_id,value_mw\n";
    for (int t = 0; t < trace.horizon_steps; ++t) {
        for (int n = 0; n < cfg.node_count(); ++n) {
            out << trace.trace_id << "," << t << ",local_demand," << n << ","
                << fmt_exact(trace.local_demand_mw[n][t]) << "\n";
            out << trace.trace_id << "," << t << ",renewable_availability," << n
                << "," << fmt_exact(trace.renewable_availability_mw[n][t]) << "\n";
        }
        out << trace.trace_id << "," << t << ",compute_arrivals,-1,"
            << fmt_exact(trace.compute_arrivals_mw[t]) << "\n";
    }
}

// Per-node dispatch dump. cost_usd is the step cost attributed to the node's
// generation (its energy plus the transport of its exports), so the column
// sums to the run's total energy cost.
inline void dump_dispatch_csv(std::ofstream& out, const ScenarioConfig& cfg,
                              int trace_id, const std::vector<DispatchRecord>& records,
                              bool header) {
    if (header)
        out << "trace_id,t,node_id,generation_mw,local_served_mw,compute_placed_mw,"
               "curtailed_mw,gas_output_mw,cost_usd\n";
    const double hours = cfg.step_hours();
    const int m = cfg.node_count();
    for (const auto& rec : records) {
        std::vector<double> node_cost(m, 0.0);
        for (int n = 0; n < m; ++n) {
            const double used =
                cfg.nodes[n].dispatchable
                    ? rec.generation_mw[n]
                    : rec.generation_mw[n] - rec.curtailed_mw[n];
            node_cost[n] = used * cfg.nodes[n].energy_cost_usd_per_mwh * hours;
        }
        for (const auto& tr : rec.transfers)
            node_cost[tr.from_node] +=
                tr.quantity_mw * tr.transport_cost_usd_per_mwh * hours;
        for (int n = 0; n < m; ++n) {
            out << trace_id << "," << rec.t << "," << n << ","
                << fmt_exact(rec.generation_mw[n]) << "," << fmt_exact(rec.local_served_mw[n])
                << "," << fmt_exact(rec.compute_placed_mw[n]) << ","
                << fmt_exact(rec.curtailed_mw[n]) << ","
                << fmt_exact(cfg.nodes[n].dispatchable ? rec.generation_mw[n] : 0.0) << ","
                << fmt_exact(node_cost[n]) << "\n";
        }
    }
}

inline void dump_market_csv(std::ofstream& out, const ScenarioConfig& cfg,
                            int trace_id, const std::vector<MarketOutcome>& outcomes,
                            bool header) {
    const int m = cfg.node_count();
    if (header) {
        out << "trace_id,t,price_usd_per_mwh,demand_mw,served_mw,shortfall_mw,"
               "payment_usd,queue_mw";
        for (int n = 0; n < m; ++n) out << ",q_node" << n << "_mw";
        out << "\n";
    }
    const double hours = cfg.step_hours();
    for (const auto& o : outcomes) {
        out << trace_id << "," << o.t << "," << fmt_exact(o.price) << ","
            << fmt_exact(o.demand_mw) << "," << fmt_exact(o.served_mw) << ","
            << fmt_exact(o.shortfall_mw) << "," << fmt_exact(o.payment_usd * hours) << ","
            << fmt_exact(o.queue_after_mw);
        for (int n = 0; n < m; ++n) out << "," << fmt_exact(o.quantities_mw[n]);
        out << "\n";
    }
}

} // namespace gridspin
