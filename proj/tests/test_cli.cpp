#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = GRIDSPIN_CLI_PATH;
const char* kScenarios = GRIDSPIN_SCENARIO_DIR;

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string("\"") + kCli + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scenario(const std::string& name) {
    return std::string("\"") + kScenarios + "/" + name + ".json\"";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The run directory is <root>/<scenario>/<timestamp>; pick the one `latest`
// points at, falling back to a scan.
fs::path latest_run_dir(const fs::path& root, const std::string& scenario_name) {
    const fs::path link = root / scenario_name / "latest";
    std::error_code ec;
    if (fs::exists(link, ec)) return fs::canonical(link, ec);
    fs::path newest;
    for (const auto& e : fs::directory_iterator(root / scenario_name))
        if (e.is_directory() && (newest.empty() || e.path() > newest))
            newest = e.path();
    return newest;
}

struct TmpDir {
    fs::path path;
    explicit TmpDir(const std::string& name) : path(fs::path("cli_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
};

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("cli run: repeated runs with the same seed are byte-identical") {
    TmpDir a("det_a"), b("det_b");
    REQUIRE(run_cli("run " + scenario("case_b") + " --traces 100 --seed 7 --out " +
                    a.path.string()) == 0);
    REQUIRE(run_cli("run " + scenario("case_b") + " --traces 100 --seed 7 --out " +
                    b.path.string()) == 0);
    const auto da = latest_run_dir(a.path, "case_b");
    const auto db = latest_run_dir(b.path, "case_b");
    const std::string sa = slurp(da / "summary.csv");
    CHECK(!sa.empty());
    CHECK(sa == slurp(db / "summary.csv"));
    CHECK(slurp(da / "series.csv") == slurp(db / "series.csv"));
}

TEST_CASE("cli run: market flags populate the market columns") {
    TmpDir tmp("market");
    REQUIRE(run_cli("run " + scenario("case_a") +
                    " --traces 5 --market merit --theta 52 --out " +
                    tmp.path.string()) == 0);
    const auto dir = latest_run_dir(tmp.path, "case_a");
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(summary.find(",merit,52,") != std::string::npos);
    // Mean price series is non-trivial in market mode.
    const std::string series = slurp(dir / "series.csv");
    CHECK(count_lines(series) == 288 + 1);
}

TEST_CASE("cli run: missing scenario file exits 1") {
    CHECK(run_cli("run missing_scenario.json") == 1);
}

TEST_CASE("cli run: runtime infeasibility exits 2") {
    using nlohmann::json;
    TmpDir tmp("infeasible");
    // Demand far beyond total generation capability, deterministic.
    json j = json::parse(slurp(fs::path(kScenarios) / "case_a.json"));
    j["walk_sigma_mw"] = 0.0;
    j["initial_demand_mw"] = 150.0;
    j["local_demand_max_mw"] = 150.0;
    j["nodes"][2]["energy_capacity_mw"] = 50.0;
    const fs::path bad = tmp.path / "infeasible.json";
    {
        std::ofstream out(bad);
        out << j.dump();
    }
    CHECK(run_cli("run " + bad.string() + " --traces 1 --out " + tmp.path.string()) ==
          2);
}

TEST_CASE("cli run: dumps are emitted on request") {
    TmpDir tmp("dumps");
    REQUIRE(run_cli("run " + scenario("case_b") +
                    " --traces 2 --market plsf --dump traces,dispatch,market --out " +
                    tmp.path.string()) == 0);
    const auto dir = latest_run_dir(tmp.path, "case_b");
    CHECK(fs::exists(dir / "traces.csv"));
    CHECK(fs::exists(dir / "dispatch.csv"));
    CHECK(fs::exists(dir / "market.csv"));
    const std::string traces = slurp(dir / "traces.csv");
    // 2 traces x 288 steps x (2 channels x 3 nodes + 1 system row) + header.
    CHECK(count_lines(traces) == 2 * 288 * 7 + 1);
}

TEST_CASE("cli sweep: full cross product yields one summary row per cell") {
    TmpDir tmp("sweep96");
    REQUIRE(run_cli("sweep " + scenario("sweep") +
                    " --mode constant-total --levels 0,10,20,30,40,50"
                    " --theta 12,50,52,100 --bids merit,plsf --policy shed,rollover"
                    " --traces 2 --out " +
                    tmp.path.string()) == 0);
    const auto dir = latest_run_dir(tmp.path, "sweep");
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(count_lines(summary) == 96 + 1);
    CHECK(fs::exists(dir / "cells" / "cell_0" / "manifest.json"));
    CHECK(fs::exists(dir / "cells" / "cell_95" / "manifest.json"));
}

TEST_CASE("cli sweep: single level equals a plain run") {
    TmpDir sw("sweep_one"), rn("run_one");
    REQUIRE(run_cli("sweep " + scenario("case_a") + " --levels 0 --traces 10 --out " +
                    sw.path.string()) == 0);
    REQUIRE(run_cli("run " + scenario("case_a") + " --traces 10 --out " +
                    rn.path.string()) == 0);
    const std::string sweep_summary =
        slurp(latest_run_dir(sw.path, "case_a") / "summary.csv");
    const std::string run_summary =
        slurp(latest_run_dir(rn.path, "case_a") / "summary.csv");
    // Same metrics columns; keys differ (sweep_mode column), so compare from
    // the traces column onward.
    const auto tail = [](const std::string& s) {
        const auto header_end = s.find('\n');
        std::string row = s.substr(header_end + 1);
        int commas = 0;
        std::size_t i = 0;
        for (; i < row.size() && commas < 7; ++i)
            if (row[i] == ',') ++commas;
        return row.substr(i);
    };
    CHECK(tail(sweep_summary) == tail(run_summary));
}

TEST_CASE("cli sweep: infeasible constant-total level exits 1") {
    TmpDir tmp("sweep_bad");
    CHECK(run_cli("sweep " + scenario("case_a") +
                  " --mode constant-total --levels 60 --traces 2 --out " +
                  tmp.path.string()) == 1);
}

TEST_CASE("cli: flag override beats scenario file beats built-in default") {
    using nlohmann::json;
    TmpDir tmp("precedence");
    // File value (seed 42) used when no flag is given.
    REQUIRE(run_cli("run " + scenario("case_a") + " --traces 2 --out " +
                    tmp.path.string()) == 0);
    auto dir = latest_run_dir(tmp.path, "case_a");
    json man = json::parse(slurp(dir / "manifest.json"));
    CHECK(man["resolved_config"]["master_seed"].get<std::uint64_t>() == 42);
    CHECK(man["resolved_config"]["excess_policy"] == "shed");

    // Flag overrides the file.
    REQUIRE(run_cli("run " + scenario("case_a") +
                    " --traces 2 --seed 7 --policy rollover --out " +
                    tmp.path.string()) == 0);
    dir = latest_run_dir(tmp.path, "case_a");
    man = json::parse(slurp(dir / "manifest.json"));
    CHECK(man["resolved_config"]["master_seed"].get<std::uint64_t>() == 7);
    CHECK(man["resolved_config"]["excess_policy"] == "rollover");
    CHECK(man["cli_overrides"]["seed"] == 7);
}

TEST_CASE("cli: GRIDSPIN_OUT provides the default output root") {
    TmpDir tmp("env_out");
    const std::string cmd = "GRIDSPIN_OUT=" + tmp.path.string() + " \"" +
                            std::string(kCli) + "\" run " + scenario("case_a") +
                            " --traces 2 >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(latest_run_dir(tmp.path, "case_a") / "summary.csv"));
}

TEST_CASE("cli: manifest is sufficient to reproduce a run") {
    using nlohmann::json;
    TmpDir tmp("repro"), tmp2("repro2");
    REQUIRE(run_cli("run " + scenario("case_b") + " --traces 20 --seed 99 --out " +
                    tmp.path.string()) == 0);
    const auto dir = latest_run_dir(tmp.path, "case_b");
    const json man = json::parse(slurp(dir / "manifest.json"));

    // Rebuild the scenario from the manifest's resolved config and rerun.
    const fs::path rebuilt = tmp2.path / "rebuilt.json";
    {
        std::ofstream out(rebuilt);
        out << man["resolved_config"].dump(2);
    }
    REQUIRE(run_cli("run " + rebuilt.string() + " --traces 20 --out " +
                    tmp2.path.string()) == 0);
    const auto dir2 = latest_run_dir(tmp2.path, "case_b");
    CHECK(slurp(dir / "summary.csv") == slurp(dir2 / "summary.csv"));
}
