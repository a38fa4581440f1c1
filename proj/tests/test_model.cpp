#include <cmath>
#include <cstring>

#include "doctest.h"
#include "hycls/model.hpp"
#include "test_support.hpp"

using namespace hycls;
using test::example_transcode;
using test::plain_broadcaster;
using test::plain_region;
using test::zero_transcode;

namespace {

LatencyModel link_only(double link_s, TranscodeTable table) {
    LatencyModel lm;
    lm.link_s[{0, 0}] = link_s;
    lm.transcode = std::move(table);
    return lm;
}

}  // namespace

TEST_CASE("broadcast latency sums link, transcode and delivery") {
    BroadcasterProfile b = plain_broadcaster(0, 6000.0);
    Region r = plain_region("r0");

    SUBCASE("all-zero components give zero") {
        LatencyModel lm = link_only(0.0, zero_transcode());
        r.delivery_latency_s["source"] = 0.0;
        CHECK(broadcast_latency(b, r, 0, {"source", 6000.0}, lm, 0, LoadBand::Low) == 0.0);
    }
    SUBCASE("worked example: 0.5 + 1.2 + 0.3") {
        LatencyModel lm = link_only(0.5, example_transcode());
        r.delivery_latency_s["half"] = 0.3;
        CHECK(broadcast_latency(b, r, 0, {"half", 3000.0}, lm, 0, LoadBand::Low) ==
              doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("upscale clamps to the source pair") {
        b.source_bitrate_kbps = 3000.0;
        LatencyModel lm = link_only(0.2, example_transcode());
        r.delivery_latency_s["hd"] = 0.1;
        CHECK(broadcast_latency(b, r, 0, {"hd", 6000.0}, lm, 0, LoadBand::Low) ==
              doctest::Approx(1.1).epsilon(1e-12));
    }
    SUBCASE("for fixed source, latency is constant in requested bitrate above it") {
        b.source_bitrate_kbps = 3000.0;
        LatencyModel lm = link_only(0.4, example_transcode());
        r.delivery_latency_s["v"] = 0.2;
        const double base = broadcast_latency(b, r, 0, {"v", 3000.0}, lm, 0, LoadBand::Low);
        for (double q : {3000.0, 3500.0, 4800.0, 6000.0, 9999.0}) {
            CHECK(broadcast_latency(b, r, 0, {"v", q}, lm, 0, LoadBand::Low) == base);
        }
    }
    SUBCASE("missing entries are configuration errors naming the key") {
        LatencyModel lm;  // no link, no synth
        lm.transcode = zero_transcode();
        CHECK_THROWS_AS(broadcast_latency(b, r, 0, {"source", 6000.0}, lm, 0, LoadBand::Low),
                        ConfigError);
        LatencyModel lm2 = link_only(0.1, zero_transcode());
        CHECK_THROWS_AS(broadcast_latency(b, r, 0, {"absent", 6000.0}, lm2, 0, LoadBand::Low),
                        ConfigError);
        b.source_bitrate_kbps = 9000.0;  // above the grid
        LatencyModel lm3 = link_only(0.1, zero_transcode());
        CHECK_THROWS_AS(broadcast_latency(b, r, 0, {"source", 9000.0}, lm3, 0, LoadBand::Low),
                        ConfigError);
    }
}

TEST_CASE("gain follows alpha + ln(1 - beta L)") {
    const GainParams p{1.0, 0.011};
    CHECK(gain(p, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gain(p, 57.0) == doctest::Approx(0.013823140661678446).epsilon(1e-12));
    CHECK_THROWS_AS(gain(p, 91.0), std::domain_error);
    CHECK_THROWS_AS(gain(p, 1.0 / 0.011), std::domain_error);  // argument hits zero
    CHECK(try_gain(p, 91.0) == std::nullopt);
    CHECK(try_gain(p, 10.0).has_value());

    SUBCASE("strictly decreasing in latency") {
        double prev = gain(p, 0.0);
        for (double latency = 0.5; latency <= 57.0; latency += 0.5) {
            const double g = gain(p, latency);
            CHECK(g < prev);
            prev = g;
        }
    }
}

TEST_CASE("utility weighs per-version gains by the audience") {
    Region r = plain_region("r0");
    const GainParams p{1.0, 0.011};

    SUBCASE("single version, N=10, zero latency") {
        BroadcasterProfile b = plain_broadcaster(0, 3000.0, 10.0);
        LatencyModel lm = link_only(0.0, zero_transcode());
        CHECK(utility(b, r, 0, lm, p, 0) == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("two versions with gains 0.5 and 0.25, audiences 8 and 2") {
        BroadcasterProfile b = plain_broadcaster(0, 3000.0);
        // delivery latencies hand-solved so the gains land exactly
        r.delivery_latency_s = {{"a", 35.76994002612424}, {"b", 47.96667702354412}};
        b.viewer_dist = {{{"a", 3000.0}, 8.0}, {{"b", 1000.0}, 2.0}};
        LatencyModel lm = link_only(0.0, zero_transcode());
        CHECK(utility(b, r, 0, lm, p, 0) == doctest::Approx(4.5).epsilon(1e-9));
    }
    SUBCASE("empty audience scores zero whatever the latencies") {
        BroadcasterProfile b = plain_broadcaster(0, 3000.0, 0.0);
        r.delivery_latency_s["source"] = 40.0;
        LatencyModel lm = link_only(5.0, zero_transcode());
        CHECK(utility(b, r, 0, lm, p, 0) == 0.0);
    }
    SUBCASE("any out-of-domain version marks the option infeasible") {
        BroadcasterProfile b = plain_broadcaster(0, 3000.0);
        b.viewer_dist = {{{"source", 3000.0}, 5.0}, {{"far", 1000.0}, 1.0}};
        r.delivery_latency_s = {{"source", 1.0}, {"far", 95.0}};
        LatencyModel lm = link_only(0.0, zero_transcode());
        CHECK(utility(b, r, 0, lm, p, 0) == kNegInf);
    }
    SUBCASE("linear in viewer counts") {
        Rng rng(42);
        LatencyModel lm = link_only(1.5, zero_transcode());
        for (int trial = 0; trial < 50; ++trial) {
            BroadcasterProfile b = plain_broadcaster(0, 3000.0);
            r.delivery_latency_s = {{"a", rng.uniform(0.0, 30.0)}, {"b", rng.uniform(0.0, 30.0)}};
            b.viewer_dist = {{{"a", 3000.0}, rng.uniform(0.0, 50.0)},
                             {{"b", 1000.0}, rng.uniform(0.0, 50.0)}};
            const double u1 = utility(b, r, 0, lm, p, 0);
            const double k = rng.uniform(0.1, 7.0);
            for (auto& va : b.viewer_dist) va.viewers *= k;
            const double uk = utility(b, r, 0, lm, p, 0);
            CHECK(uk == doctest::Approx(k * u1).epsilon(1e-9));
        }
    }
    SUBCASE("pure: identical inputs give bit-identical results") {
        BroadcasterProfile b = plain_broadcaster(0, 3000.0, 3.25);
        r.delivery_latency_s["source"] = 12.75;
        LatencyModel lm = link_only(2.5, zero_transcode());
        const double u1 = utility(b, r, 0, lm, p, 0);
        const double u2 = utility(b, r, 0, lm, p, 0);
        CHECK(std::memcmp(&u1, &u2, sizeof u1) == 0);
    }
}

TEST_CASE("objective reports per-event minima and the global minimum") {
    SUBCASE("one event, min of two") {
        SlotWorkload w;
        w.slot = 0;
        w.broadcasters = {0, 1};
        w.events = {{0, 1}};
        UtilityTable u = UtilityTable::filled(2, 1, 0.0);
        u.set(0, 0, 5.0);
        u.set(1, 0, 3.0);
        Assignment a;
        a.region_of = {0, 0};
        const auto rep = objective(a, w, u);
        CHECK(rep.event_min == std::vector<double>{3.0});
        CHECK(rep.global_min == 3.0);
    }
    SUBCASE("singleton events mirror their member") {
        SlotWorkload w;
        w.broadcasters = {0, 1};
        w.events = {{0}, {1}};
        UtilityTable u = UtilityTable::filled(2, 2, 0.0);
        u.set(0, 0, 7.5);
        u.set(1, 1, 2.5);
        Assignment a;
        a.region_of = {0, 1};
        const auto rep = objective(a, w, u);
        CHECK(rep.event_min == std::vector<double>{7.5, 2.5});
        CHECK(rep.global_min == 2.5);
    }
    SUBCASE("three members 4,4,7 give 4") {
        SlotWorkload w;
        w.broadcasters = {0, 1, 2};
        w.events = {{0, 1, 2}};
        UtilityTable u = UtilityTable::filled(3, 1, 0.0);
        u.set(0, 0, 4.0);
        u.set(1, 0, 4.0);
        u.set(2, 0, 7.0);
        Assignment a;
        a.region_of = {0, 0, 0};
        CHECK(objective(a, w, u).global_min == 4.0);
    }
    SUBCASE("event minimum equals some member and never exceeds any") {
        Rng rng(7);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 1 + static_cast<int>(rng.next_below(6));
            const int n_r = 1 + static_cast<int>(rng.next_below(3));
            SlotWorkload w;
            w.events.emplace_back();
            for (int i = 0; i < n; ++i) {
                w.broadcasters.push_back(i);
                w.events[0].push_back(i);
            }
            UtilityTable u = UtilityTable::filled(n, n_r, 0.0);
            Assignment a;
            for (int i = 0; i < n; ++i) {
                a.region_of.push_back(static_cast<int>(rng.next_below(n_r)));
                for (int r = 0; r < n_r; ++r) u.set(i, r, rng.uniform(-5.0, 5.0));
            }
            const auto rep = objective(a, w, u);
            bool hit = false;
            for (int i = 0; i < n; ++i) {
                const double mu = u.at(i, a.region_of[i]);
                CHECK(rep.event_min[0] <= mu);
                if (rep.event_min[0] == mu) hit = true;
            }
            CHECK(hit);
        }
    }
}

TEST_CASE("workload partition validation") {
    SlotWorkload w;
    w.broadcasters = {0, 1, 2};
    w.events = {{0, 1}, {2}};
    CHECK(w.valid_partition());
    w.events = {{0, 1}};
    CHECK_FALSE(w.valid_partition());  // does not cover
    w.events = {{0, 1}, {1, 2}};
    CHECK_FALSE(w.valid_partition());  // overlap
    w.events = {{0, 1}, {}, {2}};
    CHECK_FALSE(w.valid_partition());  // empty event
}

TEST_CASE("transcode table validation rejects non-monotone grids") {
    TranscodeTable t;
    t.grid_kbps = {1000, 2000};
    t.bands = {{1.0, 0.5, 1.2, 1.5}};  // decreasing in output bitrate
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.bands = {{1.0, 1.1, 0.9, 1.5}};  // decreasing in input bitrate
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.bands = {{1.0, 1.1, 1.2, 1.5}};
    CHECK_NOTHROW(t.validate());
}
