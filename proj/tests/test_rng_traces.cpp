#include <cmath>
#include <vector>

#include "doctest.h"

#include "gridspin/rng.hpp"
#include "gridspin/traces.hpp"

#include "helpers.hpp"

using namespace gridspin;

TEST_CASE("counter rng: random access matches sequential access") {
    rng::Stream s{1234};
    std::vector<double> forward;
    for (int i = 0; i < 64; ++i) forward.push_back(s.gaussian(i));
    for (int i = 63; i >= 0; --i) CHECK(s.gaussian(i) == forward[i]);
}

TEST_CASE("counter rng: distinct keys give distinct streams") {
    rng::Stream a{rng::stream_for(1, 0, 0, 0).key()};
    rng::Stream b{rng::stream_for(1, 1, 0, 0).key()};
    rng::Stream c{rng::stream_for(1, 0, 1, 0).key()};
    rng::Stream d{rng::stream_for(1, 0, 0, 1).key()};
    CHECK(a.bits(0) != b.bits(0));
    CHECK(a.bits(0) != c.bits(0));
    CHECK(a.bits(0) != d.bits(0));
    CHECK(b.bits(0) != c.bits(0));
}

TEST_CASE("counter rng: uniforms land in [0,1) and gaussians have sane moments") {
    rng::Stream s{99};
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform01(i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < n; ++i) {
        const double g = s.gaussian(i);
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gen_random_walk: zero sigma is a constant series") {
    auto series = gen_random_walk(40.0, 0.0, 10, 0.0, 1e9, rng::Stream{7});
    REQUIRE(series.size() == 10);
    for (double v : series) CHECK(v == 40.0);
}

TEST_CASE("gen_random_walk: clamp keeps every sample inside bounds") {
    // Walk pinned near the floor so the clamp is exercised hard.
    auto series = gen_random_walk(0.0, 5.0, 100000, 0.0, 60.0, rng::Stream{11});
    for (double v : series) {
        CHECK(v >= 0.0);
        CHECK(v <= 60.0);
    }
}

TEST_CASE("gen_random_walk: start outside bounds is an error") {
    CHECK_THROWS_AS(gen_random_walk(-1.0, 5.0, 10, 0.0, 100.0, rng::Stream{1}),
                    BoundsError);
    CHECK_THROWS_AS(gen_random_walk(101.0, 5.0, 10, 0.0, 100.0, rng::Stream{1}),
                    BoundsError);
}

TEST_CASE("gen_random_walk: same stream twice is bit-identical") {
    auto a = gen_random_walk(40.0, 5.0, 1000, 0.0, 1e9, rng::Stream{123});
    auto b = gen_random_walk(40.0, 5.0, 1000, 0.0, 1e9, rng::Stream{123});
    CHECK(a == b);
}

TEST_CASE("gen_random_walk: unclamped increment stddev approximates sigma") {
    const double sigma = 5.0;
    const int steps = 10000;
    // Bounds wide enough that no clamp ever bites.
    auto series = gen_random_walk(0.0, sigma, steps, -1e12, 1e12, rng::Stream{5});
    double sum = 0.0, sumsq = 0.0;
    for (int t = 1; t < steps; ++t) {
        const double inc = series[t] - series[t - 1];
        sum += inc;
        sumsq += inc * inc;
    }
    const int n = steps - 1;
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(sd == doctest::Approx(sigma).epsilon(0.10));
}

TEST_CASE("counter rng: golden values pin the stream derivation") {
    // Frozen outputs; a change here silently invalidates every recorded
    // trace, so it must be deliberate.
    const rng::Stream a = rng::stream_for(42, 0, 0, 0);
    CHECK(a.bits(0) == 3644812913237958366ULL);
    CHECK(a.gaussian(0) == -0.40438921559134178);
    CHECK(a.gaussian(7) == 0.89061632622641718);
    const rng::Stream b = rng::stream_for(42, 0, 1, 1);
    CHECK(b.bits(0) == 10500370885456637143ULL);
    CHECK(b.gaussian(0) == -1.0612759771800027);
    const rng::Stream c = rng::stream_for(42, 3, 2, 0);
    CHECK(c.bits(0) == 17809911699040684572ULL);
    CHECK(c.gaussian(7) == -0.27444666954023039);
}

TEST_CASE("gen_trace: deterministic and matches the configured horizon") {
    ScenarioConfig cfg = test::three_node_config();
    cfg.master_seed = 1;
    const Trace t0 = gen_trace(cfg, 0);
    const Trace t0_again = gen_trace(cfg, 0);
    CHECK(t0.local_demand_mw == t0_again.local_demand_mw);
    CHECK(t0.renewable_availability_mw == t0_again.renewable_availability_mw);
    CHECK(t0.compute_arrivals_mw == t0_again.compute_arrivals_mw);

    // 24 h of 5-minute steps.
    CHECK(cfg.horizon_steps == 288);
    CHECK(t0.compute_arrivals_mw.size() == 288);
    for (int n = 0; n < 3; ++n) {
        CHECK(t0.local_demand_mw[n].size() == 288);
        CHECK(t0.renewable_availability_mw[n].size() == 288);
    }
}

TEST_CASE("gen_trace: different trace ids differ, dispatchable availability is zero") {
    ScenarioConfig cfg = test::three_node_config();
    const Trace t0 = gen_trace(cfg, 0);
    const Trace t1 = gen_trace(cfg, 1);
    CHECK(t0.local_demand_mw != t1.local_demand_mw);
    CHECK(t0.compute_arrivals_mw != t1.compute_arrivals_mw);
    for (double v : t0.renewable_availability_mw[2]) CHECK(v == 0.0);
}

TEST_CASE("gen_trace: channels respect their clamp ranges") {
    ScenarioConfig cfg = test::three_node_config();
    for (int id = 0; id < 20; ++id) {
        const Trace tr = gen_trace(cfg, id);
        for (int n = 0; n < 3; ++n) {
            for (double v : tr.local_demand_mw[n]) {
                CHECK(v >= 0.0);
                CHECK(v <= cfg.local_demand_max_mw);
            }
            for (double v : tr.renewable_availability_mw[n]) {
                CHECK(v >= 0.0);
                CHECK(v <= cfg.nodes[n].energy_capacity_mw);
            }
        }
        for (double v : tr.compute_arrivals_mw) {
            CHECK(v >= 0.0);
            CHECK(v <= cfg.compute_arrivals_max_mw);
        }
    }
}
