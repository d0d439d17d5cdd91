// gridspin command-line interface: run scenarios, sweeps, and ensembles;
// emit CSV/SVG artifacts; expose every config knob as a flag override.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime infeasibility.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridspin/charts.hpp"
#include "gridspin/csv.hpp"
#include "gridspin/manifest.hpp"
#include "gridspin/metrics.hpp"
#include "gridspin/scenario_io.hpp"
#include "gridspin/version.hpp"

namespace fs = std::filesystem;
using namespace gridspin;

namespace {

struct CommonOpts {
    std::string scenario;
    std::optional<int> traces;
    std::optional<std::uint64_t> seed;
    std::string out_root;
    std::string market = ""; // off | merit | plsf
    std::optional<double> theta;
    std::string policy; // shed | rollover
    int jobs = 0;
    bool charts = false;
    std::vector<std::string> dump;
};

// scalar_market: the plain-run form of --theta/--policy; the sweep subcommand
// registers list-valued versions of those names instead.
void add_common_flags(CLI::App* cmd, CommonOpts& o, bool scalar_market) {
    cmd->add_option("scenario,--scenario", o.scenario, "Scenario name or file path");
    cmd->add_option("--traces", o.traces, "Number of Monte Carlo traces");
    cmd->add_option("--seed", o.seed, "Master seed override");
    cmd->add_option("--out", o.out_root, "Output root (default $GRIDSPIN_OUT or ./out)");
    cmd->add_option("--market", o.market, "Market mode: off, merit, or plsf")
        ->check(CLI::IsMember({"off", "merit", "plsf"}));
    if (scalar_market) {
        cmd->add_option("--theta", o.theta, "Shortfall penalty, $/MWh");
        cmd->add_option("--policy", o.policy,
                        "Unserved-compute policy: shed or rollover");
    }
    cmd->add_option("--jobs", o.jobs, "Worker threads (default: machine parallelism)");
    cmd->add_flag("--charts", o.charts, "Emit SVG charts (off by default)");
    cmd->add_option("--dump", o.dump, "Extra CSV dumps: traces, dispatch, market")
        ->delimiter(',');
}

std::vector<std::string> exe_relative_scenario_dirs(const char* argv0) {
    std::vector<std::string> dirs;
    std::error_code ec;
    fs::path exe = fs::read_symlink("/proc/self/exe", ec);
    if (ec) exe = fs::path(argv0 ? argv0 : "");
    const fs::path base = exe.parent_path();
    for (const char* rel : {"../scenarios", "../../scenarios", "../../../scenarios"})
        dirs.push_back((base / rel).lexically_normal().string());
    return dirs;
}

// Applies CLI overrides onto a loaded config and records them for the manifest.
json apply_overrides(ScenarioConfig& cfg, const CommonOpts& o) {
    json overrides = json::object();
    if (o.seed) {
        cfg.master_seed = *o.seed;
        overrides["seed"] = *o.seed;
    }
    if (o.traces) {
        cfg.default_traces = *o.traces;
        overrides["traces"] = *o.traces;
    }
    if (!o.market.empty()) {
        overrides["market"] = o.market;
        if (o.market == "off") {
            cfg.market_enabled = false;
        } else {
            cfg.market_enabled = true;
            cfg.market.bid_format =
                o.market == "plsf" ? BidFormat::plsf : BidFormat::merit;
        }
    }
    if (o.theta) {
        cfg.market.theta_usd_per_mwh = *o.theta;
        overrides["theta"] = *o.theta;
    }
    if (!o.policy.empty()) {
        cfg.market.excess_policy =
            detail::parse_excess_policy(o.policy, "--policy");
        overrides["policy"] = o.policy;
    }
    return overrides;
}

// out/<scenario>/<timestamp>/ with a `latest` link beside it.
fs::path make_run_dir(const std::string& out_root, const std::string& scenario) {
    const std::string root = !out_root.empty()
                                 ? out_root
                                 : (std::getenv("GRIDSPIN_OUT")
                                        ? std::string(std::getenv("GRIDSPIN_OUT"))
                                        : std::string("out"));
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);

    fs::path base = fs::path(root) / scenario;
    fs::create_directories(base);
    fs::path dir = base / stamp;
    for (int k = 1; fs::exists(dir); ++k)
        dir = base / (std::string(stamp) + "_" + std::to_string(k));
    fs::create_directories(dir);

    std::error_code ec;
    const fs::path link = base / "latest";
    fs::remove(link, ec);
    fs::create_directory_symlink(fs::absolute(dir), link, ec); // best effort
    return dir;
}

void write_dumps(const fs::path& dir, const ScenarioConfig& cfg, int traces,
                 const std::vector<std::string>& kinds) {
    const bool want_traces =
        std::find(kinds.begin(), kinds.end(), "traces") != kinds.end();
    const bool want_dispatch =
        std::find(kinds.begin(), kinds.end(), "dispatch") != kinds.end();
    const bool want_market =
        std::find(kinds.begin(), kinds.end(), "market") != kinds.end();
    if (!(want_traces || want_dispatch || want_market)) return;

    std::ofstream tf, df, mf;
    if (want_traces) tf.open(dir / "traces.csv");
    if (want_dispatch) df.open(dir / "dispatch.csv");
    if (want_market && cfg.market_enabled) mf.open(dir / "market.csv");
    for (int i = 0; i < traces; ++i) {
        const Trace trace = gen_trace(cfg, i);
        if (want_traces) dump_traces_csv(tf, cfg, trace, i == 0);
        if (want_dispatch || want_market) {
            const TraceRun run = run_trace(cfg, trace);
            if (want_dispatch) dump_dispatch_csv(df, cfg, i, run.dispatch, i == 0);
            if (want_market && cfg.market_enabled)
                dump_market_csv(mf, cfg, i, run.market, i == 0);
        }
    }
}

void write_run_charts(const fs::path& dir, const SeriesMeans& s) {
    fs::create_directories(dir / "charts");
    std::vector<double> t(s.gas_output_mw.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    write_line_chart_svg((dir / "charts" / "timeseries.svg").string(),
                         "Ensemble mean time series", "timestep", "MW", t,
                         {{"local demand", s.local_demand_mw},
                          {"renewable availability", s.renewable_availability_mw},
                          {"gas output", s.gas_output_mw},
                          {"curtailed", s.curtailed_mw},
                          {"compute served", s.compute_served_mw}});
}

int cmd_run(const CommonOpts& opts, const char* argv0) {
    const std::string arg = opts.scenario;
    if (arg.empty()) {
        std::cerr << "error: no scenario given\n";
        return 1;
    }
    const std::string path =
        resolve_scenario_path(arg, exe_relative_scenario_dirs(argv0));
    ScenarioConfig cfg = load_scenario(path);
    const json overrides = apply_overrides(cfg, opts);
    require_valid(cfg);
    const int traces = cfg.default_traces;
    const int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();

    const fs::path dir = make_run_dir(opts.out_root, cfg.name);
    RunManifest man;
    man.scenario_path = fs::absolute(path).string();
    man.resolved_config = cfg;
    man.cli_overrides = overrides;
    man.traces = traces;
    man.jobs = jobs;
    man.summary_path = (dir / "summary.csv").string();
    man.series_path = (dir / "series.csv").string();
    write_manifest((dir / "manifest.json").string(), man);

    const auto t0 = std::chrono::steady_clock::now();
    const EnsembleResult res = run_ensemble(cfg, traces, jobs);

    const auto renewables = cfg.renewable_nodes();
    const double level =
        renewables.empty() ? 0.0 : cfg.nodes[renewables.front()].compute_capacity_mw;
    CellKey key{cfg.name,
                "-",
                level,
                cfg.market_enabled ? to_string(cfg.market.bid_format) : "off",
                cfg.market.theta_usd_per_mwh,
                to_string(cfg.market.excess_policy),
                traces};
    write_summary_csv(man.summary_path, {{key, res.summary}});
    write_series_csv(man.series_path, {{key, res.series}});
    write_dumps(dir, cfg, traces, opts.dump);
    if (opts.charts) write_run_charts(dir, res.series);

    man.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest((dir / "manifest.json").string(), man);

    std::cout << "run " << cfg.name << ": " << traces << " traces, COE "
              << fmt_g(res.summary.coe.mean) << " +/- "
              << fmt_g(res.summary.coe.half_width95) << " $/MWh, curtailed "
              << fmt_g(res.summary.curtailed_mw.mean) << " MW, gas mean "
              << fmt_g(res.summary.gas_mean_mw.mean) << " MW\n"
              << "outputs: " << dir.string() << "\n";
    return 0;
}

struct SweepOpts {
    CommonOpts common;
    std::string mode;
    std::vector<double> levels;
    std::vector<double> thetas;
    std::vector<std::string> bids;
    std::vector<std::string> policies;
};

int cmd_sweep(const SweepOpts& sopts, const char* argv0) {
    const CommonOpts& opts = sopts.common;
    const std::string arg = opts.scenario;
    if (arg.empty()) {
        std::cerr << "error: no scenario given\n";
        return 1;
    }
    const std::string path =
        resolve_scenario_path(arg, exe_relative_scenario_dirs(argv0));
    ScenarioConfig base = load_scenario(path);
    json overrides = apply_overrides(base, opts);
    require_valid(base);
    const int traces = base.default_traces;
    const int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();

    // Flag > scenario file > built-in default, per sweep dimension.
    SweepMode mode = base.sweep.mode;
    if (!sopts.mode.empty()) {
        mode = detail::parse_sweep_mode(sopts.mode, "--mode");
        overrides["mode"] = sopts.mode;
    }
    std::vector<double> levels =
        !sopts.levels.empty() ? sopts.levels
                              : (!base.sweep.levels_mw.empty() ? base.sweep.levels_mw
                                                               : std::vector<double>{0.0});
    std::vector<BidFormat> bids;
    bool market_on = base.market_enabled;
    if (!sopts.bids.empty()) {
        market_on = true;
        for (const auto& b : sopts.bids)
            bids.push_back(detail::parse_bid_format(b, "--bids"));
    } else if (!base.sweep.bids.empty() && opts.market != "off") {
        // A bid-format grid in the scenario file turns the market sweep on.
        market_on = true;
        bids = base.sweep.bids;
    } else if (market_on) {
        bids = {base.market.bid_format};
    }
    std::vector<double> thetas =
        !sopts.thetas.empty()
            ? sopts.thetas
            : (market_on && !base.sweep.thetas.empty()
                   ? base.sweep.thetas
                   : std::vector<double>{base.market.theta_usd_per_mwh});
    std::vector<ExcessPolicy> policies;
    if (!sopts.policies.empty())
        for (const auto& p : sopts.policies)
            policies.push_back(detail::parse_excess_policy(p, "--policy"));
    else
        policies = !base.sweep.policies.empty()
                       ? base.sweep.policies
                       : std::vector<ExcessPolicy>{base.market.excess_policy};

    // Validate levels up front so an invalid sweep fails before any work.
    for (double level : levels) apply_distribution_level(base, level, mode);

    const fs::path dir = make_run_dir(opts.out_root, base.name);
    RunManifest man;
    man.scenario_path = fs::absolute(path).string();
    man.resolved_config = base;
    man.cli_overrides = overrides;
    man.traces = traces;
    man.jobs = jobs;
    man.summary_path = (dir / "summary.csv").string();
    man.series_path = (dir / "series.csv").string();
    write_manifest((dir / "manifest.json").string(), man);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<CellKey, MetricsSummary>> rows;
    std::vector<std::pair<CellKey, SeriesMeans>> series_rows;
    int cell_index = 0;
    for (double level : levels) {
        for (double theta : thetas) {
            for (std::size_t b = 0; b < std::max<std::size_t>(bids.size(), 1); ++b) {
                for (ExcessPolicy policy : policies) {
                    ScenarioConfig cfg = apply_distribution_level(base, level, mode);
                    cfg.market_enabled = market_on;
                    cfg.market.theta_usd_per_mwh = theta;
                    if (market_on) cfg.market.bid_format = bids[b];
                    cfg.market.excess_policy = policy;

                    const EnsembleResult res = run_ensemble(cfg, traces, jobs);
                    CellKey key{base.name,
                                to_string(mode),
                                level,
                                market_on ? to_string(bids[b]) : "off",
                                theta,
                                to_string(policy),
                                traces};
                    rows.emplace_back(key, res.summary);
                    series_rows.emplace_back(key, res.series);

                    fs::path cell_dir =
                        dir / "cells" / ("cell_" + std::to_string(cell_index));
                    fs::create_directories(cell_dir);
                    RunManifest cell_man = man;
                    cell_man.resolved_config = cfg;
                    cell_man.summary_path = man.summary_path;
                    cell_man.series_path = man.series_path;
                    write_manifest((cell_dir / "manifest.json").string(), cell_man);
                    ++cell_index;
                }
            }
        }
    }

    write_summary_csv(man.summary_path, rows);
    write_series_csv(man.series_path, series_rows);

    if (opts.charts) {
        fs::create_directories(dir / "charts");
        auto chart_metric = [&](const std::string& name, auto proj, bool normalized) {
            std::vector<ChartSeries> cs;
            std::vector<std::vector<double>> groups;
            std::vector<std::string> labels;
            for (double theta : thetas) {
                for (std::size_t b = 0; b < std::max<std::size_t>(bids.size(), 1); ++b) {
                    for (ExcessPolicy policy : policies) {
                        std::vector<double> ys;
                        for (const auto& [key, s] : rows) {
                            const bool match =
                                key.theta == theta &&
                                key.market == (market_on ? to_string(bids[b])
                                                         : std::string("off")) &&
                                key.policy == to_string(policy);
                            if (match) ys.push_back(proj(s));
                        }
                        groups.push_back(std::move(ys));
                        labels.push_back(
                            (market_on ? std::string(to_string(bids[b])) + " " : "") +
                            "theta=" + fmt_g(theta) + " " + to_string(policy));
                    }
                }
            }
            if (normalized) {
                try {
                    groups = normalize_by_max(groups);
                } catch (const DegenerateError&) {
                    return; // nothing to plot
                }
            }
            for (std::size_t i = 0; i < groups.size(); ++i)
                cs.push_back({labels[i], groups[i]});
            write_line_chart_svg((dir / "charts" / (name + ".svg")).string(), name,
                                 "HPC capacity per renewable node (MW)",
                                 normalized ? "normalized" : name, levels, cs);
        };
        chart_metric("coe_usd_per_mwh",
                     [](const MetricsSummary& s) { return s.coe.mean; }, false);
        chart_metric("curtailed_mw",
                     [](const MetricsSummary& s) { return s.curtailed_mw.mean; }, false);
        chart_metric("gas_mean_mw",
                     [](const MetricsSummary& s) { return s.gas_mean_mw.mean; }, false);
        chart_metric("gas_peak_mw",
                     [](const MetricsSummary& s) { return s.gas_peak_mw.mean; }, false);
        if (market_on) {
            chart_metric("total_cost_norm",
                         [](const MetricsSummary& s) { return s.total_cost_usd.mean; },
                         true);
            chart_metric("compute_served_norm",
                         [](const MetricsSummary& s) { return s.compute_served_mwh.mean; },
                         true);
            chart_metric("curtail_after_hpc_norm",
                         [](const MetricsSummary& s) { return s.curtail_after_hpc_mw.mean; },
                         true);
            chart_metric("unit_cost_norm",
                         [](const MetricsSummary& s) { return s.unit_cost.mean; }, true);
        }
    }

    man.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest((dir / "manifest.json").string(), man);

    std::cout << "sweep " << base.name << ": " << rows.size() << " cells x " << traces
              << " traces\noutputs: " << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridspin: grid/HPC co-scheduling simulator"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "Run one scenario ensemble");
    add_common_flags(run, run_opts, true);

    SweepOpts sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a distribution sweep");
    add_common_flags(sweep, sweep_opts.common, false);
    sweep->add_option("--mode", sweep_opts.mode, "Sweep mode: additive or constant-total")
        ->check(CLI::IsMember({"additive", "constant-total"}));
    sweep->add_option("--levels", sweep_opts.levels, "HPC MW per renewable node")
        ->delimiter(',');
    sweep->add_option("--theta", sweep_opts.thetas, "Shortfall penalties, $/MWh")
        ->delimiter(',');
    sweep->add_option("--bids", sweep_opts.bids, "Bid formats: merit, plsf")
        ->delimiter(',');
    sweep->add_option("--policy", sweep_opts.policies, "Policies: shed, rollover")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts, argv[0]);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, argv[0]);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
