#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "hycls/assign.hpp"
#include "test_support.hpp"

using namespace hycls;
using test::plain_region;
using test::singleton_workload;
using test::uniform_demands;

namespace {

struct Instance {
    SlotWorkload w;
    UtilityTable u;
    std::vector<Demand> demands;
};

Instance random_instance(Rng& rng, int max_b, int max_r, bool events_allowed = true) {
    Instance inst;
    const int n_b = 1 + static_cast<int>(rng.next_below(max_b));
    const int n_r = 1 + static_cast<int>(rng.next_below(max_r));
    inst.w.slot = 0;
    for (int i = 0; i < n_b; ++i) inst.w.broadcasters.push_back(i);
    // random partition: walk locals, open a new event with probability 1/2
    std::vector<int> order(n_b);
    for (int i = 0; i < n_b; ++i) order[i] = i;
    for (int i = n_b - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    for (int i = 0; i < n_b; ++i) {
        if (!events_allowed || inst.w.events.empty() || rng.next_double() < 0.5)
            inst.w.events.emplace_back();
        inst.w.events.back().push_back(order[i]);
    }
    inst.u = UtilityTable::filled(n_b, n_r, 0.0);
    for (int b = 0; b < n_b; ++b)
        for (int r = 0; r < n_r; ++r) inst.u.set(b, r, rng.uniform(-2.0, 10.0));
    inst.demands = uniform_demands(n_b, 1.0, 4.0);
    return inst;
}

std::vector<Region> uniform_regions(int n, double compute_cap) {
    std::vector<Region> rs;
    for (int i = 0; i < n; ++i) {
        Region r = plain_region("r" + std::to_string(i));
        r.compute_cap = compute_cap;
        rs.push_back(r);
    }
    return rs;
}

bool survives(const CandidateSet& cs, int local, int region) {
    for (const auto& c : cs.per_broadcaster[local])
        if (c.region == region) return true;
    return false;
}

}  // namespace

TEST_CASE("prune follows the per-event max-min bound") {
    SUBCASE("worked 2x2 example") {
        SlotWorkload w;
        w.broadcasters = {0, 1};
        w.events = {{0, 1}};
        UtilityTable u = UtilityTable::filled(2, 2, 0.0);
        u.set(0, 0, 5.0);
        u.set(0, 1, 3.0);
        u.set(1, 0, 4.0);
        u.set(1, 1, 6.0);
        const CandidateSet cs = prune(w, u);
        CHECK(cs.event_bound[0] == 4.0);
        CHECK(survives(cs, 0, 0));
        CHECK_FALSE(survives(cs, 0, 1));  // utility 3 < bound 4
        CHECK(survives(cs, 1, 0));
        CHECK(survives(cs, 1, 1));
        CHECK(cs.fallback_events.empty());
    }
    SUBCASE("singleton event keeps only argmax ties") {
        SlotWorkload w = singleton_workload(1);
        UtilityTable u = UtilityTable::filled(1, 3, 0.0);
        u.set(0, 0, 2.0);
        u.set(0, 1, 7.0);
        u.set(0, 2, 7.0);
        const CandidateSet cs = prune(w, u);
        CHECK(cs.per_broadcaster[0].size() == 2);
        CHECK_FALSE(survives(cs, 0, 0));
    }
    SUBCASE("all-equal utilities remove nothing") {
        SlotWorkload w;
        w.broadcasters = {0, 1, 2};
        w.events = {{0, 1, 2}};
        const UtilityTable u = UtilityTable::filled(3, 3, 1.25);
        const CandidateSet cs = prune(w, u);
        for (int b = 0; b < 3; ++b) CHECK(cs.per_broadcaster[b].size() == 3);
    }
    SUBCASE("no common reachable region: flagged, top-1 fallback") {
        SlotWorkload w;
        w.broadcasters = {0, 1};
        w.events = {{0, 1}};
        UtilityTable u = UtilityTable::filled(2, 2, kNegInf);
        u.set(0, 0, 5.0);  // b0 reaches only r0
        u.set(1, 1, 2.0);  // b1 reaches only r1
        const CandidateSet cs = prune(w, u);
        CHECK(cs.fallback_events == std::vector<int>{0});
        REQUIRE(cs.per_broadcaster[0].size() == 1);
        REQUIRE(cs.per_broadcaster[1].size() == 1);
        CHECK(cs.per_broadcaster[0][0].region == 0);
        CHECK(cs.per_broadcaster[1][0].region == 1);
    }
    SUBCASE("every broadcaster with a reachable region keeps a candidate") {
        Rng rng(21);
        for (int trial = 0; trial < 300; ++trial) {
            Instance inst = random_instance(rng, 6, 3);
            const CandidateSet cs = prune(inst.w, inst.u);
            for (int b = 0; b < inst.w.size(); ++b) {
                REQUIRE(!cs.per_broadcaster[b].empty());
                const int ev = [&] {
                    for (std::size_t e = 0; e < inst.w.events.size(); ++e)
                        for (int m : inst.w.events[e])
                            if (m == b) return static_cast<int>(e);
                    return -1;
                }();
                for (const auto& c : cs.per_broadcaster[b])
                    CHECK(c.utility >= cs.event_bound[ev]);
            }
        }
    }
}

TEST_CASE("greedy assignment") {
    SUBCASE("non-binding capacity matches the exact oracle under both aggregations") {
        Rng rng(33);
        for (int trial = 0; trial < 300; ++trial) {
            Instance inst = random_instance(rng, 5, 3);
            const auto regions = uniform_regions(inst.u.n_regions, 1000.0);
            const std::vector<double> price(inst.u.n_regions, 1.0);

            CapacityLedger ledger(regions);
            const CandidateSet cs = prune(inst.w, inst.u);
            const Assignment greedy =
                greedy_assign(inst.w, cs, inst.demands, ledger, price, 0);
            REQUIRE(greedy.complete());
            CHECK(greedy.overflow.empty());
            // each broadcaster lands on a utility-argmax region
            for (int b = 0; b < inst.w.size(); ++b) {
                double best = kNegInf;
                for (int r = 0; r < inst.u.n_regions; ++r) best = std::max(best, inst.u.at(b, r));
                CHECK(inst.u.at(b, greedy.region_of[b]) == best);
            }
            for (Aggregation agg : {Aggregation::SumOfMins, Aggregation::MinOfMins}) {
                CapacityLedger fresh(regions);
                const Assignment exact =
                    exact_assign(inst.w, inst.u, inst.demands, fresh, agg);
                CHECK(aggregate_objective(agg, objective(greedy, inst.w, inst.u)) ==
                      aggregate_objective(agg, objective(exact, inst.w, inst.u)));
            }
        }
    }
    SUBCASE("worked capacity trace: the higher-ratio broadcaster wins the tight region") {
        SlotWorkload w;
        w.broadcasters = {0, 1};
        w.events = {{0}, {1}};
        CandidateSet cs;
        cs.n_regions = 2;
        cs.event_bound = {0.0, 0.0};
        cs.per_broadcaster = {{{0, 10.0}, {1, 6.0}}, {{0, 8.0}, {1, 7.0}}};
        auto regions = uniform_regions(2, 10.0);
        regions[0].compute_cap = 1.0;  // fits exactly one
        CapacityLedger ledger(regions);
        const auto demands = uniform_demands(2, 1.0, 4.0);
        const Assignment a = greedy_assign(w, cs, demands, ledger, {1.0, 1.0}, 1);
        CHECK(a.region_of == std::vector<int>{0, 1});
        CHECK(a.overflow.empty());
        CHECK(ledger.remaining_compute(0) == doctest::Approx(0.0));
    }
    SUBCASE("zero broadcasters give an empty assignment") {
        SlotWorkload w;
        CandidateSet cs = prune(w, UtilityTable::filled(0, 2, 0.0));
        auto regions = uniform_regions(2, 10.0);
        CapacityLedger ledger(regions);
        const Assignment a = greedy_assign(w, cs, {}, ledger, {1.0, 1.0}, 0);
        CHECK(a.region_of.empty());
        CHECK(a.bandwidth_by_region == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("overflow goes to the dedicated region and is flagged") {
        SlotWorkload w = singleton_workload(3);
        UtilityTable u = UtilityTable::filled(3, 2, kNegInf);
        for (int b = 0; b < 3; ++b) u.set(b, 1, 5.0);  // everyone only reaches r1
        auto regions = uniform_regions(2, 100.0);
        regions[0].kind = RegionKind::Dedicated;
        regions[1].compute_cap = 2.0;  // fits two of three
        CapacityLedger ledger(regions);
        const CandidateSet cs = prune(w, u);
        const Assignment a = greedy_assign(w, cs, uniform_demands(3), ledger, {1.0, 1.0}, 0);
        CHECK(a.overflow.size() == 1);
        CHECK(a.region_of[a.overflow[0]] == 0);
    }
    SUBCASE("exhausted overflow raises a hard infeasibility listing the broadcasters") {
        SlotWorkload w;
        w.broadcasters = {7, 9};
        w.events = {{0}, {1}};
        UtilityTable u = UtilityTable::filled(2, 2, 1.0);
        auto regions = uniform_regions(2, 0.5);  // nothing fits anywhere
        regions[0].kind = RegionKind::Dedicated;
        CapacityLedger ledger(regions);
        const CandidateSet cs = prune(w, u);
        try {
            greedy_assign(w, cs, uniform_demands(2), ledger, {1.0, 1.0}, 0);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("7") != std::string::npos);
            CHECK(msg.find("9") != std::string::npos);
        }
    }
    SUBCASE("deterministic: identical inputs give identical assignments") {
        Rng rng(77);
        for (int trial = 0; trial < 50; ++trial) {
            Instance inst = random_instance(rng, 6, 3);
            const auto regions = uniform_regions(inst.u.n_regions, 3.0);
            const std::vector<double> price(inst.u.n_regions, 1.0);
            const CandidateSet cs = prune(inst.w, inst.u);
            CapacityLedger l1(regions), l2(regions);
            const Assignment a1 = greedy_assign(inst.w, cs, inst.demands, l1, price, 0);
            const Assignment a2 = greedy_assign(inst.w, cs, inst.demands, l2, price, 0);
            CHECK(a1.region_of == a2.region_of);
            CHECK(a1.overflow == a2.overflow);
        }
    }
    SUBCASE("ledger compute never goes negative under pressure") {
        Rng rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            Instance inst = random_instance(rng, 7, 3);
            auto regions = uniform_regions(inst.u.n_regions, rng.uniform(1.0, 4.0));
            regions[0].kind = RegionKind::Dedicated;
            regions[0].compute_cap = 100.0;  // overflow host stays open
            CapacityLedger ledger(regions);
            const CandidateSet cs = prune(inst.w, inst.u);
            const Assignment a =
                greedy_assign(inst.w, cs, inst.demands, ledger,
                              std::vector<double>(inst.u.n_regions, 1.0), 0);
            REQUIRE(a.complete());
            for (int r = 0; r < inst.u.n_regions; ++r)
                CHECK(ledger.remaining_compute(r) >= -1e-9);
        }
    }
}

TEST_CASE("exact oracle") {
    SUBCASE("single broadcaster lands on its argmax region") {
        SlotWorkload w = singleton_workload(1);
        UtilityTable u = UtilityTable::filled(1, 4, 0.0);
        u.set(0, 0, 1.0);
        u.set(0, 1, 9.0);
        u.set(0, 2, 3.0);
        u.set(0, 3, 8.0);
        CapacityLedger ledger(uniform_regions(4, 10.0));
        const Assignment a =
            exact_assign(w, u, uniform_demands(1), ledger, Aggregation::SumOfMins);
        CHECK(a.region_of == std::vector<int>{1});
    }
    SUBCASE("dominates greedy on random capacity-bound instances") {
        Rng rng(55);
        for (int trial = 0; trial < 200; ++trial) {
            Instance inst = random_instance(rng, 5, 3);
            auto regions = uniform_regions(inst.u.n_regions, rng.uniform(2.0, 6.0));
            regions[0].kind = RegionKind::Dedicated;
            regions[0].compute_cap = 100.0;
            for (Aggregation agg : {Aggregation::SumOfMins, Aggregation::MinOfMins}) {
                CapacityLedger lg(regions);
                const CandidateSet cs = prune(inst.w, inst.u);
                Assignment greedy;
                greedy = greedy_assign(inst.w, cs, inst.demands, lg,
                                       std::vector<double>(inst.u.n_regions, 1.0), 0);
                CapacityLedger le(regions);
                const Assignment exact = exact_assign(inst.w, inst.u, inst.demands, le, agg);
                CHECK(aggregate_objective(agg, objective(exact, inst.w, inst.u)) >=
                      aggregate_objective(agg, objective(greedy, inst.w, inst.u)) - 1e-12);
            }
        }
    }
    SUBCASE("oversized instances are refused") {
        SlotWorkload w = singleton_workload(9);
        UtilityTable u = UtilityTable::filled(9, 2, 0.0);
        CapacityLedger ledger(uniform_regions(2, 100.0));
        CHECK_THROWS_AS(exact_assign(w, u, uniform_demands(9), ledger, Aggregation::SumOfMins),
                        std::length_error);
    }
    SUBCASE("pruning never changes the exact optimum (random spot checks)") {
        Rng rng(101);
        for (int trial = 0; trial < 300; ++trial) {
            Instance inst = random_instance(rng, 4, 3);
            CapacityLedger ledger(uniform_regions(inst.u.n_regions, 1000.0));
            const CandidateSet cs = prune(inst.w, inst.u);
            UtilityTable pruned = UtilityTable::filled(inst.w.size(), inst.u.n_regions, kNegInf);
            for (int b = 0; b < inst.w.size(); ++b)
                for (const auto& c : cs.per_broadcaster[b]) pruned.set(b, c.region, c.utility);
            for (Aggregation agg : {Aggregation::SumOfMins, Aggregation::MinOfMins}) {
                const Assignment full = exact_assign(inst.w, inst.u, inst.demands, ledger, agg);
                const Assignment cut = exact_assign(inst.w, pruned, inst.demands, ledger, agg);
                // evaluate both against the unpruned utilities
                CHECK(aggregate_objective(agg, objective(cut, inst.w, inst.u)) ==
                      aggregate_objective(agg, objective(full, inst.w, inst.u)));
            }
        }
    }
}

TEST_CASE("load-balancing baselines") {
    SUBCASE("single region forces every strategy to the same output") {
        SlotWorkload w = singleton_workload(3);
        UtilityTable u = UtilityTable::filled(3, 1, 2.0);
        auto regions = uniform_regions(1, 100.0);
        regions[0].kind = RegionKind::Dedicated;
        const auto demands = uniform_demands(3);
        CapacityLedger l1(regions), l2(regions), l3(regions);
        const CandidateSet cs = prune(w, u);
        const Assignment g = greedy_assign(w, cs, demands, l1, {1.0}, 0);
        const Assignment v = lb_v_assign(w, {5.0, 1.0, 3.0}, u, demands, l2, 0);
        const Assignment c = lb_c_assign(w, u, demands, l3, 0);
        CHECK(g.region_of == v.region_of);
        CHECK(g.region_of == c.region_of);
    }
    SUBCASE("LB-V places the big audience first") {
        SlotWorkload w = singleton_workload(2);
        UtilityTable u = UtilityTable::filled(2, 2, 1.0);
        auto regions = uniform_regions(2, 1.0);  // each region fits one
        regions[0].bandwidth_cap_mbps = 500.0;
        regions[1].bandwidth_cap_mbps = 100.0;
        CapacityLedger ledger(regions);
        const Assignment a =
            lb_v_assign(w, {100.0, 1.0}, u, uniform_demands(2), ledger, 0);
        CHECK(a.region_of[0] == 0);  // 100 viewers got the roomy region
        CHECK(a.region_of[1] == 1);
    }
    SUBCASE("least-loaded spread over equal empty regions") {
        SlotWorkload w = singleton_workload(4);
        UtilityTable u = UtilityTable::filled(4, 2, 1.0);
        const auto regions = uniform_regions(2, 100.0);
        CapacityLedger ledger(regions);
        const Assignment a = lb_c_assign(w, u, uniform_demands(4), ledger, 0);
        CHECK(a.compute_by_region[0] == doctest::Approx(2.0));
        CHECK(a.compute_by_region[1] == doctest::Approx(2.0));
    }
}

TEST_CASE("lease cost arithmetic on the ledger") {
    auto regions = uniform_regions(1, 1000.0);
    regions[0].instance_bandwidth_mbps = 700.0;
    regions[0].price_bandwidth = 1.0;
    regions[0].price_compute = 0.0;
    SUBCASE("1400 Mbps over 700 Mbps instances leases two") {
        CapacityLedger ledger(regions);
        ledger.commit(0, {1.0, 1400.0});
        CHECK(ledger.costs().bandwidth == doctest::Approx(2.0));
    }
    SUBCASE("701 Mbps still leases two (integral instances)") {
        CapacityLedger ledger(regions);
        ledger.commit(0, {1.0, 701.0});
        CHECK(ledger.costs().bandwidth == doctest::Approx(2.0));
    }
    SUBCASE("dedicated regions never lease") {
        regions[0].kind = RegionKind::Dedicated;
        CapacityLedger ledger(regions);
        ledger.commit(0, {5.0, 5000.0});
        CHECK(ledger.costs().total() == 0.0);
    }
    SUBCASE("strict budget blocks placements that would overrun") {
        regions[0].kind = RegionKind::PublicCloud;
        regions[0].price_compute = 1.0;
        regions[0].unit_compute = 8.0;
        StrictBudget strict;
        strict.enabled = true;
        strict.compute_budget = 1.0;  // one instance only
        CapacityLedger ledger(regions, strict);
        CHECK(ledger.can_host(0, {8.0, 1.0}));
        ledger.commit(0, {8.0, 1.0});
        CHECK_FALSE(ledger.can_host(0, {1.0, 1.0}));  // would need a second instance
    }
}
