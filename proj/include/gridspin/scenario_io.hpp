// Scenario file loading, defaulting, and saving (JSON schema).
//
// Defaults applied when a key is absent:
//   initial_demand_mw           40 MW per node
//   initial_generation_mw       50% of each node's energy capacity
//   initial_compute_demand_mw   total compute capacity
//   compute_arrivals_max_mw     2x total compute capacity
//   transport_cost_usd_per_mwh  may be a scalar (flat off-diagonal) or a matrix
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridspin/model.hpp"

namespace gridspin {

using json = nlohmann::json;

namespace detail {

inline NodeKind parse_node_kind(const std::string& s, const std::string& path) {
    if (s == "solar") return NodeKind::solar;
    if (s == "wind") return NodeKind::wind;
    if (s == "gas") return NodeKind::gas;
    throw ScenarioError(path + ": unknown node kind '" + s +
                        "' (expected solar|wind|gas)");
}

inline BidFormat parse_bid_format(const std::string& s, const std::string& path) {
    if (s == "merit") return BidFormat::merit;
    if (s == "plsf") return BidFormat::plsf;
    throw ScenarioError(path + ": unknown bid format '" + s +
                        "' (expected merit|plsf)");
}

inline ExcessPolicy parse_excess_policy(const std::string& s, const std::string& path) {
    if (s == "shed") return ExcessPolicy::shed;
    if (s == "rollover") return ExcessPolicy::rollover;
    throw ScenarioError(path + ": unknown excess policy '" + s +
                        "' (expected shed|rollover)");
}

inline SweepMode parse_sweep_mode(const std::string& s, const std::string& path) {
    if (s == "additive") return SweepMode::additive;
    if (s == "constant-total" || s == "constant_total") return SweepMode::constant_total;
    throw ScenarioError(path + ": unknown sweep mode '" + s +
                        "' (expected additive|constant-total)");
}

// Accepts a scalar (broadcast to all nodes) or a per-node array.
inline std::vector<double> per_node_values(const json& j, int node_count,
                                           const std::string& path) {
    std::vector<double> out;
    if (j.is_number()) {
        out.assign(node_count, j.get<double>());
    } else if (j.is_array()) {
        out = j.get<std::vector<double>>();
        if (static_cast<int>(out.size()) != node_count)
            throw ScenarioError(path + ": expected " + std::to_string(node_count) +
                                " entries, got " + std::to_string(out.size()));
    } else {
        throw ScenarioError(path + ": expected number or array");
    }
    return out;
}

} // namespace detail

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    try {
        cfg.name = j.value("name", std::string{"scenario"});
        cfg.step_minutes = j.value("step_minutes", 5.0);
        cfg.horizon_steps = j.value("horizon_steps", 288);
        cfg.walk_sigma_mw = j.value("walk_sigma_mw", 5.0);
        cfg.master_seed = j.value("master_seed", std::uint64_t{1});
        cfg.default_traces = j.value("traces", 100);

        if (!j.contains("nodes") || !j.at("nodes").is_array())
            throw ScenarioError("nodes: required array is missing");
        int idx = 0;
        for (const auto& nj : j.at("nodes")) {
            const std::string base = "nodes[" + std::to_string(idx) + "]";
            Node n;
            n.id = nj.value("id", idx);
            n.kind = detail::parse_node_kind(nj.value("kind", std::string{"gas"}),
                                             base + ".kind");
            n.name = nj.value("name", std::string(to_string(n.kind)) + "_" +
                                          std::to_string(idx));
            n.energy_capacity_mw = nj.value("energy_capacity_mw", 0.0);
            n.compute_capacity_mw = nj.value("compute_capacity_mw", 0.0);
            n.energy_cost_usd_per_mwh = nj.value("energy_cost_usd_per_mwh", 0.0);
            n.carbon_intensity_lb_per_kwh = nj.value("carbon_intensity_lb_per_kwh", 0.0);
            n.dispatchable = nj.value("dispatchable", n.kind == NodeKind::gas);
            cfg.nodes.push_back(n);
            ++idx;
        }
        const int m = cfg.node_count();

        const json& tj = j.contains("transport_cost_usd_per_mwh")
                             ? j.at("transport_cost_usd_per_mwh")
                             : json(40.0);
        if (tj.is_number()) {
            cfg.transport = TransportCostMatrix::flat(m, tj.get<double>());
        } else if (tj.is_array()) {
            cfg.transport.resize(m);
            const auto rows = tj.get<std::vector<std::vector<double>>>();
            if (static_cast<int>(rows.size()) != m)
                throw ScenarioError("transport_cost_usd_per_mwh: expected " +
                                    std::to_string(m) + " rows");
            for (int i = 0; i < m; ++i) {
                if (static_cast<int>(rows[i].size()) != m)
                    throw ScenarioError("transport_cost_usd_per_mwh[" +
                                        std::to_string(i) + "]: expected " +
                                        std::to_string(m) + " columns");
                for (int k = 0; k < m; ++k) cfg.transport.at(i, k) = rows[i][k];
            }
        } else {
            throw ScenarioError("transport_cost_usd_per_mwh: expected number or matrix");
        }

        cfg.initial_demand_mw = detail::per_node_values(
            j.contains("initial_demand_mw") ? j.at("initial_demand_mw") : json(40.0),
            m, "initial_demand_mw");
        if (j.contains("initial_generation_mw")) {
            cfg.initial_generation_mw = detail::per_node_values(
                j.at("initial_generation_mw"), m, "initial_generation_mw");
        } else {
            cfg.initial_generation_mw.resize(m);
            for (int i = 0; i < m; ++i)
                cfg.initial_generation_mw[i] = 0.5 * cfg.nodes[i].energy_capacity_mw;
        }
        cfg.local_demand_max_mw =
            j.value("local_demand_max_mw", std::numeric_limits<double>::infinity());
        cfg.initial_compute_demand_mw =
            j.value("initial_compute_demand_mw", cfg.total_compute_capacity_mw());
        cfg.compute_arrivals_max_mw =
            j.value("compute_arrivals_max_mw", 2.0 * cfg.total_compute_capacity_mw());

        if (j.contains("market")) {
            const json& mj = j.at("market");
            cfg.market_enabled = mj.value("enabled", false);
            cfg.market.theta_usd_per_mwh = mj.value("theta_usd_per_mwh", 100.0);
            cfg.market.bid_format = detail::parse_bid_format(
                mj.value("bid_format", std::string{"merit"}), "market.bid_format");
        }
        cfg.market.excess_policy = detail::parse_excess_policy(
            j.value("excess_policy", std::string{"shed"}), "excess_policy");

        if (j.contains("sweep")) {
            const json& sj = j.at("sweep");
            cfg.sweep.mode = detail::parse_sweep_mode(
                sj.value("mode", std::string{"additive"}), "sweep.mode");
            cfg.sweep.levels_mw = sj.value("levels", std::vector<double>{});
            cfg.sweep.thetas = sj.value("theta", std::vector<double>{});
            for (const auto& b : sj.value("bids", std::vector<std::string>{}))
                cfg.sweep.bids.push_back(detail::parse_bid_format(b, "sweep.bids"));
            for (const auto& p : sj.value("policies", std::vector<std::string>{}))
                cfg.sweep.policies.push_back(
                    detail::parse_excess_policy(p, "sweep.policies"));
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string{"scenario parse: "} + e.what());
    }
    return cfg;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["step_minutes"] = cfg.step_minutes;
    j["horizon_steps"] = cfg.horizon_steps;
    j["walk_sigma_mw"] = cfg.walk_sigma_mw;
    j["master_seed"] = cfg.master_seed;
    j["traces"] = cfg.default_traces;
    j["excess_policy"] = to_string(cfg.market.excess_policy);
    j["market"] = {{"enabled", cfg.market_enabled},
                   {"theta_usd_per_mwh", cfg.market.theta_usd_per_mwh},
                   {"bid_format", to_string(cfg.market.bid_format)}};
    j["initial_demand_mw"] = cfg.initial_demand_mw;
    j["initial_generation_mw"] = cfg.initial_generation_mw;
    if (std::isfinite(cfg.local_demand_max_mw))
        j["local_demand_max_mw"] = cfg.local_demand_max_mw;
    j["initial_compute_demand_mw"] = cfg.initial_compute_demand_mw;
    j["compute_arrivals_max_mw"] = cfg.compute_arrivals_max_mw;

    const int m = cfg.node_count();
    json rows = json::array();
    for (int i = 0; i < m; ++i) {
        json row = json::array();
        for (int k = 0; k < m; ++k) row.push_back(cfg.transport.at(i, k));
        rows.push_back(row);
    }
    j["transport_cost_usd_per_mwh"] = rows;

    j["nodes"] = json::array();
    for (const auto& n : cfg.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"name", n.name},
                              {"kind", to_string(n.kind)},
                              {"energy_capacity_mw", n.energy_capacity_mw},
                              {"compute_capacity_mw", n.compute_capacity_mw},
                              {"energy_cost_usd_per_mwh", n.energy_cost_usd_per_mwh},
                              {"carbon_intensity_lb_per_kwh", n.carbon_intensity_lb_per_kwh},
                              {"dispatchable", n.dispatchable}});
    }

    if (!cfg.sweep.levels_mw.empty() || !cfg.sweep.thetas.empty() ||
        !cfg.sweep.bids.empty() || !cfg.sweep.policies.empty()) {
        json sj;
        sj["mode"] = to_string(cfg.sweep.mode);
        sj["levels"] = cfg.sweep.levels_mw;
        sj["theta"] = cfg.sweep.thetas;
        json bids = json::array();
        for (auto b : cfg.sweep.bids) bids.push_back(to_string(b));
        sj["bids"] = bids;
        json pols = json::array();
        for (auto p : cfg.sweep.policies) pols.push_back(to_string(p));
        sj["policies"] = pols;
        j["sweep"] = sj;
    }
    return j;
}

// Loads, applies defaults, and validates; throws ScenarioError on any failure.
inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ScenarioError("parse error in " + path + ": " + e.what());
    }
    ScenarioConfig cfg = scenario_from_json(j);
    require_valid(cfg);
    return cfg;
}

inline void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write scenario file: " + path);
    out << scenario_to_json(cfg).dump(2) << "\n";
}

// Resolves a scenario argument: an existing path, `<arg>.json`, or a name
// looked up under ./scenarios, $GRIDSPIN_SCENARIOS, and any extra dirs.
inline std::string resolve_scenario_path(const std::string& arg,
                                         const std::vector<std::string>& extra_dirs = {}) {
    namespace fs = std::filesystem;
    std::vector<std::string> candidates{arg, arg + ".json"};
    std::vector<std::string> dirs{"scenarios"};
    if (const char* env = std::getenv("GRIDSPIN_SCENARIOS")) dirs.push_back(env);
    for (const auto& d : extra_dirs) dirs.push_back(d);
    for (const auto& d : dirs) {
        candidates.push_back(d + "/" + arg);
        candidates.push_back(d + "/" + arg + ".json");
    }
    for (const auto& c : candidates) {
        std::error_code ec;
        if (fs::is_regular_file(c, ec)) return c;
    }
    throw ScenarioError("scenario not found: " + arg);
}

} // namespace gridspin
