// Seeded Gaussian-random-walk time series: per-node local demand, per-node
// renewable availability, and system-level compute-load arrivals.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "gridspin/model.hpp"
#include "gridspin/rng.hpp"

namespace gridspin {

enum class TraceChannel : std::uint64_t {
    local_demand = 0,
    renewable_availability = 1,
    compute_arrivals = 2,
};

inline const char* to_string(TraceChannel c) {
    switch (c) {
        case TraceChannel::local_demand: return "local_demand";
        case TraceChannel::renewable_availability: return "renewable_availability";
        case TraceChannel::compute_arrivals: return "compute_arrivals";
    }
    return "?";
}

struct Trace {
    int trace_id = 0;
    int horizon_steps = 0;
    std::vector<std::vector<double>> local_demand_mw;           // [node][t]
    std::vector<std::vector<double>> renewable_availability_mw; // [node][t]
    std::vector<double> compute_arrivals_mw;                    // [t]
};

// Clamped Gaussian random walk:
//   series[0] = x0
//   series[t] = clamp(series[t-1] + eps_t, lower, upper), eps_t ~ N(0, sigma^2)
inline std::vector<double> gen_random_walk(double x0, double sigma_mw, int steps,
                                           double lower_mw, double upper_mw,
                                           rng::Stream stream) {
    if (!(lower_mw <= x0 && x0 <= upper_mw))
        throw BoundsError("walk start " + std::to_string(x0) + " outside [" +
                          std::to_string(lower_mw) + ", " +
                          std::to_string(upper_mw) + "]");
    std::vector<double> series(static_cast<std::size_t>(steps));
    double x = x0;
    for (int t = 0; t < steps; ++t) {
        if (t > 0) {
            x = std::clamp(x + sigma_mw * stream.gaussian(static_cast<std::uint64_t>(t)),
                           lower_mw, upper_mw);
        }
        series[t] = x;
    }
    return series;
}

// Generates one trace. Every (trace_id, channel, node) triple gets its own
// counter-based stream, so the result is a pure function of (cfg, trace_id).
inline Trace gen_trace(const ScenarioConfig& cfg, int trace_id) {
    const int m = cfg.node_count();
    const int steps = cfg.horizon_steps;
    const auto tid = static_cast<std::uint64_t>(trace_id);

    Trace trace;
    trace.trace_id = trace_id;
    trace.horizon_steps = steps;
    trace.local_demand_mw.resize(m);
    trace.renewable_availability_mw.resize(m);

    for (int n = 0; n < m; ++n) {
        trace.local_demand_mw[n] = gen_random_walk(
            cfg.initial_demand_mw[n], cfg.walk_sigma_mw, steps, 0.0,
            cfg.local_demand_max_mw,
            rng::stream_for(cfg.master_seed, tid,
                            static_cast<std::uint64_t>(TraceChannel::local_demand),
                            static_cast<std::uint64_t>(n)));

        if (cfg.nodes[n].dispatchable) {
            // Dispatchable output is chosen by the engine, not the weather.
            trace.renewable_availability_mw[n].assign(steps, 0.0);
        } else {
            trace.renewable_availability_mw[n] = gen_random_walk(
                cfg.initial_generation_mw[n], cfg.walk_sigma_mw, steps, 0.0,
                cfg.nodes[n].energy_capacity_mw,
                rng::stream_for(
                    cfg.master_seed, tid,
                    static_cast<std::uint64_t>(TraceChannel::renewable_availability),
                    static_cast<std::uint64_t>(n)));
        }
    }

    trace.compute_arrivals_mw = gen_random_walk(
        cfg.initial_compute_demand_mw, cfg.walk_sigma_mw, steps, 0.0,
        cfg.compute_arrivals_max_mw,
        rng::stream_for(cfg.master_seed, tid,
                        static_cast<std::uint64_t>(TraceChannel::compute_arrivals),
                        0));
    return trace;
}

} // namespace gridspin
