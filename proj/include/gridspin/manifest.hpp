// Run manifests: a resolved config snapshot plus enough metadata to reproduce
// the run exactly. Written atomically (temp file + rename) before results.
#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "gridspin/model.hpp"
#include "gridspin/scenario_io.hpp"
#include "gridspin/version.hpp"

namespace gridspin {

struct RunManifest {
    std::string scenario_path;
    ScenarioConfig resolved_config;
    json cli_overrides = json::object();
    int traces = 0;
    int jobs = 0;
    std::string summary_path;
    std::string series_path;
    double duration_seconds = -1.0; // filled in on finalize
};

inline std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json manifest_to_json(const RunManifest& man) {
    json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["created_utc"] = utc_now_iso8601();
    j["scenario_path"] = man.scenario_path;
    j["scenario_name"] = man.resolved_config.name;
    j["master_seed"] = man.resolved_config.master_seed;
    j["traces"] = man.traces;
    j["jobs"] = man.jobs;
    j["cli_overrides"] = man.cli_overrides;
    j["resolved_config"] = scenario_to_json(man.resolved_config);
    j["outputs"] = {{"summary", man.summary_path}, {"series", man.series_path}};
    if (man.duration_seconds >= 0) j["duration_seconds"] = man.duration_seconds;
    return j;
}

inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_manifest(const std::string& path, const RunManifest& man) {
    atomic_write(path, manifest_to_json(man).dump(2) + "\n");
}

} // namespace gridspin
