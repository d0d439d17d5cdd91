// Domain model: nodes, transport costs, market settings, scenario config,
// and scenario validation.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gridspin/errors.hpp"

namespace gridspin {

enum class NodeKind { solar, wind, gas };
enum class BidFormat { merit, plsf };
enum class ExcessPolicy { shed, rollover };
enum class SweepMode { additive, constant_total };

inline const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::solar: return "solar";
        case NodeKind::wind: return "wind";
        case NodeKind::gas: return "gas";
    }
    return "?";
}

inline const char* to_string(BidFormat b) {
    return b == BidFormat::merit ? "merit" : "plsf";
}

inline const char* to_string(ExcessPolicy p) {
    return p == ExcessPolicy::shed ? "shed" : "rollover";
}

inline const char* to_string(SweepMode m) {
    return m == SweepMode::additive ? "additive" : "constant-total";
}

// A grid bus with generation kind, capacities, cost, and carbon intensity.
struct Node {
    int id = 0;
    std::string name;
    NodeKind kind = NodeKind::gas;
    double energy_capacity_mw = 0.0;
    double compute_capacity_mw = 0.0;
    double energy_cost_usd_per_mwh = 0.0;     // marginal cost incl. carbon offsets
    double carbon_intensity_lb_per_kwh = 0.0; // reported, never priced
    bool dispatchable = false;                // true => acts as slack

    bool operator==(const Node&) const = default;
};

// Symmetric $/MWh cost of moving energy between node pairs; zero diagonal.
class TransportCostMatrix {
  public:
    TransportCostMatrix() = default;

    static TransportCostMatrix flat(int n, double off_diagonal_cost) {
        TransportCostMatrix m;
        m.resize(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m.at(i, j) = (i == j) ? 0.0 : off_diagonal_cost;
        return m;
    }

    void resize(int n) {
        n_ = n;
        cost_.assign(static_cast<std::size_t>(n) * n, 0.0);
    }

    int size() const { return n_; }

    double at(int from, int to) const {
        return cost_[static_cast<std::size_t>(from) * n_ + to];
    }
    double& at(int from, int to) {
        return cost_[static_cast<std::size_t>(from) * n_ + to];
    }

    bool operator==(const TransportCostMatrix&) const = default;

  private:
    int n_ = 0;
    std::vector<double> cost_;
};

// Spot HPC capacity market settings.
struct MarketConfig {
    double theta_usd_per_mwh = 100.0; // per-unit shortfall penalty
    BidFormat bid_format = BidFormat::merit;
    ExcessPolicy excess_policy = ExcessPolicy::shed;

    bool operator==(const MarketConfig&) const = default;
};

// Sweep defaults carried inside a scenario file; CLI flags override.
struct SweepSpec {
    SweepMode mode = SweepMode::additive;
    std::vector<double> levels_mw;
    std::vector<double> thetas;
    std::vector<BidFormat> bids;
    std::vector<ExcessPolicy> policies;

    bool operator==(const SweepSpec&) const = default;
};

// Full experiment description.
struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<Node> nodes;
    TransportCostMatrix transport;

    double walk_sigma_mw = 5.0;
    double step_minutes = 5.0;
    int horizon_steps = 288;

    std::vector<double> initial_demand_mw;     // per node
    std::vector<double> initial_generation_mw; // per node (renewables)
    double local_demand_max_mw = std::numeric_limits<double>::infinity();
    double initial_compute_demand_mw = 0.0;
    double compute_arrivals_max_mw = 0.0;

    std::uint64_t master_seed = 1;
    int default_traces = 100;

    bool market_enabled = false;
    MarketConfig market;
    SweepSpec sweep;

    bool operator==(const ScenarioConfig&) const = default;

    int node_count() const { return static_cast<int>(nodes.size()); }
    double step_hours() const { return step_minutes / 60.0; }

    double total_compute_capacity_mw() const {
        double total = 0.0;
        for (const auto& n : nodes) total += n.compute_capacity_mw;
        return total;
    }

    std::vector<int> dispatchable_nodes() const {
        std::vector<int> ids;
        for (const auto& n : nodes)
            if (n.dispatchable) ids.push_back(n.id);
        return ids;
    }

    std::vector<int> renewable_nodes() const {
        std::vector<int> ids;
        for (const auto& n : nodes)
            if (!n.dispatchable) ids.push_back(n.id);
        return ids;
    }
};

// One invariant violation. Violations are data, not errors.
struct Violation {
    std::string code; // stable machine-readable id, e.g. "transport.not_symmetric"
    std::string path; // field path, e.g. "nodes[2].energy_cost_usd_per_mwh"
    std::string message;
};

namespace detail {

inline void add(std::vector<Violation>& out, std::string code, std::string path,
                std::string message) {
    out.push_back(Violation{std::move(code), std::move(path), std::move(message)});
}

} // namespace detail

// Returns every invariant violation; empty result means the config is valid.
inline std::vector<Violation> validate_scenario(const ScenarioConfig& cfg) {
    using detail::add;
    std::vector<Violation> v;
    const int m = cfg.node_count();

    if (m == 0) add(v, "nodes.empty", "nodes", "scenario has no nodes");

    bool any_dispatchable = false;
    for (int i = 0; i < m; ++i) {
        const Node& n = cfg.nodes[i];
        const std::string base = "nodes[" + std::to_string(i) + "]";
        if (n.id != i)
            add(v, "node.id_mismatch", base + ".id",
                "node id " + std::to_string(n.id) + " must equal its index " +
                    std::to_string(i));
        if (n.energy_capacity_mw < 0)
            add(v, "node.energy_capacity.negative", base + ".energy_capacity_mw",
                "energy capacity must be >= 0");
        if (n.compute_capacity_mw < 0)
            add(v, "node.compute_capacity.negative", base + ".compute_capacity_mw",
                "compute capacity must be >= 0");
        if (n.energy_cost_usd_per_mwh < 0)
            add(v, "node.energy_cost.negative", base + ".energy_cost_usd_per_mwh",
                "energy cost must be >= 0");
        if (n.carbon_intensity_lb_per_kwh < 0)
            add(v, "node.carbon_intensity.negative",
                base + ".carbon_intensity_lb_per_kwh",
                "carbon intensity must be >= 0");
        any_dispatchable = any_dispatchable || n.dispatchable;
    }
    if (m > 0 && !any_dispatchable)
        add(v, "nodes.no_dispatchable", "nodes",
            "at least one dispatchable (slack) node is required");

    if (cfg.transport.size() != m)
        add(v, "transport.dimension_mismatch", "transport",
            "transport matrix is " + std::to_string(cfg.transport.size()) +
                "x" + std::to_string(cfg.transport.size()) + " but there are " +
                std::to_string(m) + " nodes");
    else {
        for (int i = 0; i < m; ++i) {
            if (cfg.transport.at(i, i) != 0.0)
                add(v, "transport.nonzero_diagonal",
                    "transport[" + std::to_string(i) + "][" + std::to_string(i) + "]",
                    "transport diagonal must be zero");
            for (int j = 0; j < m; ++j) {
                if (cfg.transport.at(i, j) < 0) {
                    add(v, "transport.negative",
                        "transport[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                        "transport costs must be >= 0");
                }
                if (j > i && cfg.transport.at(i, j) != cfg.transport.at(j, i)) {
                    add(v, "transport.not_symmetric",
                        "transport[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                        "transport matrix must be symmetric");
                }
            }
        }
    }

    if (cfg.horizon_steps < 1)
        add(v, "horizon.empty", "horizon_steps", "horizon must be >= 1 step");
    if (!(cfg.step_minutes > 0))
        add(v, "step.nonpositive", "step_minutes", "step length must be > 0");
    if (cfg.walk_sigma_mw < 0)
        add(v, "sigma.negative", "walk_sigma_mw", "walk sigma must be >= 0");
    if (cfg.default_traces < 1)
        add(v, "traces.nonpositive", "traces", "trace count must be >= 1");

    if (static_cast<int>(cfg.initial_demand_mw.size()) != m)
        add(v, "initial.demand.size_mismatch", "initial_demand_mw",
            "per-node initial demand must have one entry per node");
    if (static_cast<int>(cfg.initial_generation_mw.size()) != m)
        add(v, "initial.generation.size_mismatch", "initial_generation_mw",
            "per-node initial generation must have one entry per node");

    if (cfg.local_demand_max_mw < 0)
        add(v, "demand_max.negative", "local_demand_max_mw",
            "demand upper clamp must be >= 0");

    for (int i = 0; i < m && i < static_cast<int>(cfg.initial_demand_mw.size()); ++i) {
        const std::string p = "initial_demand_mw[" + std::to_string(i) + "]";
        if (cfg.initial_demand_mw[i] < 0)
            add(v, "initial.demand.negative", p, "initial demand must be >= 0");
        else if (cfg.initial_demand_mw[i] > cfg.local_demand_max_mw)
            add(v, "initial.demand.exceeds_max", p,
                "initial demand exceeds local_demand_max_mw");
    }
    for (int i = 0; i < m && i < static_cast<int>(cfg.initial_generation_mw.size()); ++i) {
        const std::string p = "initial_generation_mw[" + std::to_string(i) + "]";
        if (cfg.initial_generation_mw[i] < 0)
            add(v, "initial.generation.negative", p, "initial generation must be >= 0");
        else if (!cfg.nodes[i].dispatchable &&
                 cfg.initial_generation_mw[i] > cfg.nodes[i].energy_capacity_mw)
            add(v, "initial.generation.exceeds_capacity", p,
                "initial generation exceeds node energy capacity");
    }

    if (cfg.initial_compute_demand_mw < 0)
        add(v, "initial.compute.negative", "initial_compute_demand_mw",
            "initial compute demand must be >= 0");
    if (cfg.compute_arrivals_max_mw < 0)
        add(v, "arrivals_max.negative", "compute_arrivals_max_mw",
            "compute arrivals clamp must be >= 0");
    if (cfg.initial_compute_demand_mw > cfg.compute_arrivals_max_mw &&
        cfg.compute_arrivals_max_mw >= 0)
        add(v, "initial.compute.exceeds_max", "initial_compute_demand_mw",
            "initial compute demand exceeds compute_arrivals_max_mw");

    if (cfg.market.theta_usd_per_mwh < 0)
        add(v, "market.theta.negative", "market.theta_usd_per_mwh",
            "shortfall penalty theta must be >= 0");

    return v;
}

// Throws ScenarioError listing every violation code and path.
inline void require_valid(const ScenarioConfig& cfg) {
    const auto violations = validate_scenario(cfg);
    if (violations.empty()) return;
    std::string msg = "scenario '" + cfg.name + "' is invalid:";
    for (const auto& violation : violations)
        msg += "\n  [" + violation.code + "] " + violation.path + ": " +
               violation.message;
    throw ScenarioError(msg);
}

} // namespace gridspin
