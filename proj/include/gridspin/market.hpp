// Spot HPC-capacity market: supplier curves (merit-order steps or piecewise
// linear supply-function ramps), consumer price selection, clearing, and
// shed/rollover handling of unserved compute demand.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gridspin/model.hpp"

namespace gridspin {

enum class CurveKind { merit_step, plsf_ramp };

// One supplier's price-to-quantity schedule at a single timestep.
struct SupplyCurve {
    int supplier_id = 0;
    CurveKind kind = CurveKind::merit_step;
    double marginal_cost = 0.0; // $/MWh
    double max_capacity = 0.0;  // MW available this timestep

    // Offered quantity at price p. Non-decreasing in p, within [0, max_capacity].
    double quantity(double p) const {
        if (p < 0.0 || max_capacity <= 0.0) return 0.0;
        if (kind == CurveKind::merit_step)
            return p >= marginal_cost ? max_capacity : 0.0;
        // Ramp from zero to full capacity at the supplier's own rate.
        if (marginal_cost <= 0.0) return max_capacity;
        return max_capacity * std::min(p / marginal_cost, 1.0);
    }
};

struct MarketOutcome {
    int t = 0;
    double price = 0.0;               // cleared price p*, $/MWh
    double demand_mw = 0.0;           // d, arrivals plus any rollover
    std::vector<double> quantities_mw; // per node; zero for non-suppliers
    double served_mw = 0.0;
    double shortfall_mw = 0.0;
    double payment_usd = 0.0;         // price x served, dollars at hourly rate
    double queue_after_mw = 0.0;
};

inline double total_quantity(const std::vector<SupplyCurve>& curves, double p) {
    double q = 0.0;
    for (const auto& c : curves) q += c.quantity(p);
    return q;
}

// Consumer objective: pay for what is taken, penalize what is left unserved.
//   objective(p) = p * min(d, S(p)) + theta * max(d - S(p), 0)
// with S(p) the total offered supply at p.
inline double eval_objective(double p, const std::vector<SupplyCurve>& curves,
                             double d, double theta) {
    const double supply = total_quantity(curves, p);
    const double purchased = std::min(d, supply);
    return p * purchased + theta * std::max(d - supply, 0.0);
}

namespace detail {

// Candidate prices for the minimizer. The objective is piecewise linear in p
// under merit bids, so supplier rates and the demand-crossing price suffice;
// ramp bids add piecewise-quadratic stretches whose vertices must be
// candidates too. Candidates above theta are dominated.
inline std::vector<double> price_candidates(const std::vector<SupplyCurve>& curves,
                                            double d, double theta) {
    std::vector<double> breaks{0.0, theta};
    for (const auto& c : curves) {
        if (c.max_capacity <= 0.0) continue;
        if (c.marginal_cost > 0.0 && c.marginal_cost <= theta)
            breaks.push_back(c.marginal_cost);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<double> candidates = breaks;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        // Supply on (lo, hi) is base + slope * p: steps already open
        // contribute their capacity, ramps still rising contribute cap/cost.
        double base = 0.0;
        double slope = 0.0;
        for (const auto& c : curves) {
            if (c.max_capacity <= 0.0) continue;
            if (c.kind == CurveKind::merit_step || c.marginal_cost <= 0.0) {
                if (c.marginal_cost <= lo) base += c.max_capacity;
            } else if (c.marginal_cost <= lo) {
                base += c.max_capacity;
            } else {
                slope += c.max_capacity / c.marginal_cost;
            }
        }
        if (slope <= 0.0) continue;
        // Price at which cumulative supply reaches d inside this segment.
        const double cross = (d - base) / slope;
        if (cross > lo && cross < hi) candidates.push_back(cross);
        // Vertex of p*(base + slope*p) + theta*(d - base - slope*p).
        const double vertex = (theta * slope - base) / (2.0 * slope);
        if (vertex > lo && vertex < hi) candidates.push_back(vertex);
    }
    return candidates;
}

} // namespace detail

// Solves the per-timestep price selection problem over p >= 0. Ties on the
// objective prefer higher served quantity, then lower price. Dispatch at p*
// follows merit order with pro-rata rationing inside an equal-cost tier.
inline MarketOutcome select_price(const std::vector<SupplyCurve>& curves, double d,
                                  double theta, int node_count) {
    MarketOutcome out;
    out.demand_mw = d;
    out.quantities_mw.assign(static_cast<std::size_t>(node_count), 0.0);

    double best_p = 0.0;
    double best_obj = eval_objective(0.0, curves, d, theta);
    double best_served = std::min(d, total_quantity(curves, 0.0));
    for (double p : detail::price_candidates(curves, d, theta)) {
        const double obj = eval_objective(p, curves, d, theta);
        const double served = std::min(d, total_quantity(curves, p));
        const bool better =
            obj < best_obj ||
            (obj == best_obj && (served > best_served ||
                                 (served == best_served && p < best_p)));
        if (better) {
            best_p = p;
            best_obj = obj;
            best_served = served;
        }
    }

    out.price = best_p;

    // Merit-order dispatch at p*: ascending marginal cost, pro-rata within a
    // tied tier, never exceeding each supplier's offer at p*.
    std::vector<std::size_t> order(curves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (curves[a].marginal_cost != curves[b].marginal_cost)
            return curves[a].marginal_cost < curves[b].marginal_cost;
        return curves[a].supplier_id < curves[b].supplier_id;
    });

    double remaining = best_served;
    std::size_t i = 0;
    while (i < order.size() && remaining > 0.0) {
        std::size_t j = i;
        double tier_offer = 0.0;
        while (j < order.size() &&
               curves[order[j]].marginal_cost == curves[order[i]].marginal_cost) {
            tier_offer += curves[order[j]].quantity(best_p);
            ++j;
        }
        if (tier_offer > 0.0) {
            const double take = std::min(tier_offer, remaining);
            for (std::size_t k = i; k < j; ++k) {
                const auto& c = curves[order[k]];
                out.quantities_mw[c.supplier_id] +=
                    c.quantity(best_p) * take / tier_offer;
            }
            remaining -= take;
        }
        i = j;
    }

    double served = 0.0;
    for (double q : out.quantities_mw) served += q;
    out.served_mw = served;
    out.shortfall_mw = std::max(d - served, 0.0);
    out.payment_usd = best_p * served;
    return out;
}

// One market timestep: demand is arrivals plus the rollover queue; unserved
// load is discarded under shed and carried forward under rollover. The queue
// resets at the start of each trace (caller's responsibility).
inline std::pair<MarketOutcome, double> step_market(double queue_in_mw,
                                                    double arrivals_mw,
                                                    const std::vector<SupplyCurve>& curves,
                                                    const MarketConfig& mcfg,
                                                    int node_count) {
    const double d = arrivals_mw + queue_in_mw;
    MarketOutcome out = select_price(curves, d, mcfg.theta_usd_per_mwh, node_count);
    const double queue_out =
        mcfg.excess_policy == ExcessPolicy::rollover ? out.shortfall_mw : 0.0;
    out.queue_after_mw = queue_out;
    return {out, queue_out};
}

// Supplier curves from the post-dispatch state at one timestep. A renewable
// offers at most what it would otherwise curtail; the slack plant offers its
// remaining headroom (fully controllable, so always a merit step).
inline std::vector<SupplyCurve> build_supply_curves(
    const ScenarioConfig& cfg, const std::vector<double>& curtailable_mw,
    const std::vector<double>& slack_headroom_mw) {
    std::vector<SupplyCurve> curves;
    for (const auto& n : cfg.nodes) {
        if (n.compute_capacity_mw <= 0.0) continue;
        SupplyCurve c;
        c.supplier_id = n.id;
        c.marginal_cost = n.energy_cost_usd_per_mwh;
        if (n.dispatchable) {
            c.kind = CurveKind::merit_step;
            c.max_capacity = std::min(n.compute_capacity_mw, slack_headroom_mw[n.id]);
        } else {
            c.kind = cfg.market.bid_format == BidFormat::plsf ? CurveKind::plsf_ramp
                                                              : CurveKind::merit_step;
            c.max_capacity = std::min(n.compute_capacity_mw, curtailable_mw[n.id]);
        }
        c.max_capacity = std::max(c.max_capacity, 0.0);
        if (c.max_capacity > 0.0) curves.push_back(c);
    }
    return curves;
}

} // namespace gridspin
