#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hycls/model.hpp"

namespace hycls {

/// Per-broadcaster resource demand for one slot.
struct Demand {
    double compute = 0.0;         // c(b), compute-units
    double bandwidth_mbps = 0.0;  // ingest + rendition egress
};

struct LeaseCosts {
    double bandwidth = 0.0;
    double compute = 0.0;
    double total() const { return bandwidth + compute; }
};

struct StrictBudget {
    bool enabled = false;
    double bandwidth_budget = std::numeric_limits<double>::infinity();  // K_w
    double compute_budget = std::numeric_limits<double>::infinity();    // K_c
};

/// Remaining capacity per region. Compute is enforced at commit time;
/// bandwidth is tallied but never blocks (the bandwidth constraints are
/// relaxed during assignment and checked post-hoc by the engine).
class CapacityLedger {
public:
    CapacityLedger() = default;

    explicit CapacityLedger(const std::vector<Region>& regions, StrictBudget strict = {})
        : strict_(strict) {
        entries_.reserve(regions.size());
        for (const auto& r : regions) {
            Entry e;
            e.compute_cap = r.compute_cap;
            e.bandwidth_cap = r.bandwidth_cap_mbps;
            e.unit_compute = r.unit_compute;
            e.instance_bandwidth = r.instance_bandwidth_mbps;
            e.price_compute = r.price_compute;
            e.price_bandwidth = r.price_bandwidth;
            e.leased = r.leased();
            entries_.push_back(e);
        }
    }

    int size() const { return static_cast<int>(entries_.size()); }

    double remaining_compute(int r) const {
        return entries_[r].compute_cap - entries_[r].compute_used;
    }
    /// May go negative: bandwidth demand is recorded, not enforced.
    double remaining_bandwidth(int r) const {
        return entries_[r].bandwidth_cap - entries_[r].bandwidth_used;
    }
    double compute_used(int r) const { return entries_[r].compute_used; }
    double bandwidth_used(int r) const { return entries_[r].bandwidth_used; }

    bool can_host(int r, const Demand& d) const {
        const Entry& e = entries_[r];
        if (e.compute_used + d.compute > e.compute_cap + kEps) return false;
        if (strict_.enabled && e.leased) {
            LeaseCosts projected = costs_with(r, d);
            if (projected.compute > strict_.compute_budget + kEps) return false;
            if (projected.bandwidth > strict_.bandwidth_budget + kEps) return false;
        }
        return true;
    }

    void commit(int r, const Demand& d) {
        Entry& e = entries_[r];
        if (e.compute_used + d.compute > e.compute_cap + kEps) {
            throw std::logic_error("ledger commit would exceed compute capacity of region " +
                                   std::to_string(r));
        }
        e.compute_used += d.compute;
        e.bandwidth_used += d.bandwidth_mbps;
    }

    /// Instances are leased whole: ceil(use / unit) per leased region.
    LeaseCosts costs() const {
        LeaseCosts c;
        for (const auto& e : entries_) {
            if (!e.leased) continue;
            c.compute += instances(e.compute_used, e.unit_compute) * e.price_compute;
            c.bandwidth += instances(e.bandwidth_used, e.instance_bandwidth) * e.price_bandwidth;
        }
        return c;
    }

    static double instances(double used, double unit) {
        if (used <= 0.0 || unit <= 0.0) return 0.0;
        return std::ceil(used / unit - kEps);
    }

private:
    static constexpr double kEps = 1e-9;

    struct Entry {
        double compute_cap = 0.0;
        double bandwidth_cap = 0.0;
        double unit_compute = 0.0;
        double instance_bandwidth = 0.0;
        double price_compute = 0.0;
        double price_bandwidth = 0.0;
        bool leased = false;
        double compute_used = 0.0;
        double bandwidth_used = 0.0;
    };

    LeaseCosts costs_with(int r, const Demand& d) const {
        LeaseCosts c;
        for (int i = 0; i < size(); ++i) {
            const Entry& e = entries_[i];
            if (!e.leased) continue;
            const double cu = e.compute_used + (i == r ? d.compute : 0.0);
            const double bu = e.bandwidth_used + (i == r ? d.bandwidth_mbps : 0.0);
            c.compute += instances(cu, e.unit_compute) * e.price_compute;
            c.bandwidth += instances(bu, e.instance_bandwidth) * e.price_bandwidth;
        }
        return c;
    }

    std::vector<Entry> entries_;
    StrictBudget strict_;
};

/// One surviving placement option.
struct Candidate {
    int region = -1;
    double utility = kNegInf;
};

/// Pruned option lists per broadcaster plus the per-event bounds U_e.
struct CandidateSet {
    int n_regions = 0;
    std::vector<std::vector<Candidate>> per_broadcaster;  // by local index, utility-descending
    std::vector<double> event_bound;                      // U_e, kNegInf for fallback events
    std::vector<int> fallback_events;  // events with no region reachable by all members
};

/// Scaling decrease: compute U_e = max_r min_{b in e} U(b, r) per event and
/// drop every reachable pair strictly below its event's bound. The argmax
/// region of the max-min always survives for every member. Events where no
/// region is reachable by all members fall back to each member's single best
/// option and are flagged.
inline void prune_into(const SlotWorkload& w, const UtilityTable& utilities, CandidateSet& out) {
    const int n_b = w.size();
    out.n_regions = utilities.n_regions;
    out.per_broadcaster.resize(n_b);
    for (auto& v : out.per_broadcaster) v.clear();
    out.event_bound.assign(w.events.size(), kNegInf);
    out.fallback_events.clear();

    for (std::size_t ei = 0; ei < w.events.size(); ++ei) {
        const auto& event = w.events[ei];
        double bound = kNegInf;
        for (int r = 0; r < utilities.n_regions; ++r) {
            double lo = std::numeric_limits<double>::infinity();
            for (int local : event) lo = std::min(lo, utilities.at(local, r));
            bound = std::max(bound, lo);
        }
        out.event_bound[ei] = bound;

        if (bound == kNegInf) {
            // No region serves the whole event; keep each member's best option.
            out.fallback_events.push_back(static_cast<int>(ei));
            for (int local : event) {
                Candidate best;
                for (int r = 0; r < utilities.n_regions; ++r) {
                    const double u = utilities.at(local, r);
                    if (u > best.utility) best = {r, u};
                }
                if (best.region >= 0 && best.utility > kNegInf) {
                    out.per_broadcaster[local].push_back(best);
                }
            }
            continue;
        }
        for (int local : event) {
            auto& kept = out.per_broadcaster[local];
            for (int r = 0; r < utilities.n_regions; ++r) {
                const double u = utilities.at(local, r);
                if (u > kNegInf && u >= bound) kept.push_back({r, u});
            }
            std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
                if (a.utility != b.utility) return a.utility > b.utility;
                return a.region < b.region;
            });
        }
    }
}

inline CandidateSet prune(const SlotWorkload& w, const UtilityTable& utilities) {
    CandidateSet out;
    prune_into(w, utilities, out);
    return out;
}

namespace detail {

inline double efficiency_ratio(double utility, double price) {
    if (price > 0.0) return utility / price;
    if (utility > 0.0) return std::numeric_limits<double>::infinity();
    if (utility < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

inline Assignment finalize(std::vector<int> region_of, const std::vector<Demand>& demands,
                           int n_regions, std::vector<int> overflow = {}) {
    Assignment a;
    a.region_of = std::move(region_of);
    a.overflow = std::move(overflow);
    a.bandwidth_by_region.assign(n_regions, 0.0);
    a.compute_by_region.assign(n_regions, 0.0);
    for (std::size_t b = 0; b < a.region_of.size(); ++b) {
        const int r = a.region_of[b];
        if (r < 0) continue;
        a.bandwidth_by_region[r] += demands[b].bandwidth_mbps;
        a.compute_by_region[r] += demands[b].compute;
    }
    return a;
}

inline void overflow_or_collect(int local, const Demand& d, int overflow_region,
                                CapacityLedger& ledger, std::vector<int>& region_of,
                                std::vector<int>& overflow, std::vector<int>& unplaced) {
    if (overflow_region >= 0 && ledger.can_host(overflow_region, d)) {
        ledger.commit(overflow_region, d);
        region_of[local] = overflow_region;
        overflow.push_back(local);
    } else {
        unplaced.push_back(local);
    }
}

[[noreturn]] inline void throw_unplaced(const std::vector<int>& unplaced,
                                        const SlotWorkload& w) {
    std::ostringstream msg;
    msg << "no region can host broadcasters {";
    for (std::size_t i = 0; i < unplaced.size(); ++i) {
        if (i) msg << ", ";
        msg << w.broadcasters[unplaced[i]];
    }
    msg << "} at slot " << w.slot;
    throw InfeasibleError(msg.str());
}

}  // namespace detail

/// Resource assignment: pairs are visited in descending utility-per-cost
/// order; the first visit of an unassigned broadcaster commits it to its
/// best surviving region with compute room. Broadcasters that fit nowhere go
/// to the overflow region (the dedicated datacenter) and are flagged; if that
/// is also exhausted the slot is infeasible.
inline Assignment greedy_assign(const SlotWorkload& w, const CandidateSet& cands,
                                const std::vector<Demand>& demands, CapacityLedger& ledger,
                                const std::vector<double>& region_price_compute,
                                int overflow_region) {
    const int n_b = w.size();
    struct Pair {
        double ratio;
        int local;
        int region;
    };
    std::vector<Pair> order;
    for (int local = 0; local < n_b; ++local) {
        for (const auto& c : cands.per_broadcaster[local]) {
            order.push_back({detail::efficiency_ratio(c.utility, region_price_compute[c.region]),
                             local, c.region});
        }
    }
    std::sort(order.begin(), order.end(), [](const Pair& a, const Pair& b) {
        if (a.ratio != b.ratio) return a.ratio > b.ratio;
        if (a.local != b.local) return a.local < b.local;
        return a.region < b.region;
    });

    std::vector<int> region_of(n_b, -1);
    std::vector<int> overflow;
    std::vector<int> unplaced;
    for (const auto& p : order) {
        if (region_of[p.local] >= 0) continue;
        bool placed = false;
        for (const auto& c : cands.per_broadcaster[p.local]) {
            if (ledger.can_host(c.region, demands[p.local])) {
                ledger.commit(c.region, demands[p.local]);
                region_of[p.local] = c.region;
                placed = true;
                break;
            }
        }
        if (!placed) {
            detail::overflow_or_collect(p.local, demands[p.local], overflow_region, ledger,
                                        region_of, overflow, unplaced);
        }
    }
    // Broadcasters with no surviving candidate at all (unreachable everywhere).
    for (int local = 0; local < n_b; ++local) {
        if (region_of[local] >= 0) continue;
        if (std::find(unplaced.begin(), unplaced.end(), local) != unplaced.end()) continue;
        detail::overflow_or_collect(local, demands[local], overflow_region, ledger, region_of,
                                    overflow, unplaced);
    }
    if (!unplaced.empty()) detail::throw_unplaced(unplaced, w);
    return detail::finalize(std::move(region_of), demands, cands.n_regions, std::move(overflow));
}

enum class Aggregation { SumOfMins, MinOfMins };

inline double aggregate_objective(Aggregation agg, const ObjectiveReport& rep) {
    return agg == Aggregation::SumOfMins ? rep.sum() : rep.global_min;
}

struct ExactCaps {
    int max_broadcasters = 8;
    int max_regions = 4;
};

/// Brute-force oracle: enumerates every compute-feasible assignment and keeps
/// the one maximizing the chosen aggregation of per-event minima. Ties break
/// to the lexicographically smallest assignment vector. Instances above the
/// size cap are refused.
inline Assignment exact_assign(const SlotWorkload& w, const UtilityTable& utilities,
                               const std::vector<Demand>& demands, const CapacityLedger& ledger,
                               Aggregation agg, ExactCaps caps = {}) {
    const int n_b = w.size();
    const int n_r = utilities.n_regions;
    if (n_b > caps.max_broadcasters || n_r > caps.max_regions) {
        throw std::length_error("exact_assign refused: " + std::to_string(n_b) + " broadcasters x " +
                                std::to_string(n_r) + " regions exceeds cap " +
                                std::to_string(caps.max_broadcasters) + "x" +
                                std::to_string(caps.max_regions));
    }
    if (n_b == 0) return detail::finalize({}, demands, n_r);

    std::vector<double> base_remaining(n_r);
    for (int r = 0; r < n_r; ++r) base_remaining[r] = ledger.remaining_compute(r);

    std::vector<int> current(n_b, 0);
    std::vector<int> best;
    double best_value = kNegInf;
    bool found = false;

    Assignment probe;
    probe.region_of.resize(n_b);
    std::vector<double> remaining(n_r);

    for (;;) {
        remaining = base_remaining;
        bool feasible = true;
        for (int b = 0; b < n_b && feasible; ++b) {
            remaining[current[b]] -= demands[b].compute;
            if (remaining[current[b]] < -1e-9) feasible = false;
        }
        if (feasible) {
            probe.region_of = current;
            const double value = aggregate_objective(agg, objective(probe, w, utilities));
            if (!found || value > best_value) {
                found = true;
                best_value = value;
                best = current;
            }
        }
        // odometer, region of the last broadcaster spins fastest
        int pos = n_b - 1;
        while (pos >= 0) {
            if (++current[pos] < n_r) break;
            current[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    if (!found) {
        std::vector<int> all(n_b);
        for (int b = 0; b < n_b; ++b) all[b] = b;
        detail::throw_unplaced(all, w);
    }
    return detail::finalize(std::move(best), demands, n_r);
}

/// Views-balancing baseline: broadcasters in descending viewer order, each to
/// the reachable region with the most remaining bandwidth that still has
/// compute room. Utility is ignored.
inline Assignment lb_v_assign(const SlotWorkload& w, const std::vector<double>& viewer_counts,
                              const UtilityTable& reachability, const std::vector<Demand>& demands,
                              CapacityLedger& ledger, int overflow_region) {
    const int n_b = w.size();
    std::vector<int> order(n_b);
    for (int b = 0; b < n_b; ++b) order[b] = b;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (viewer_counts[a] != viewer_counts[b]) return viewer_counts[a] > viewer_counts[b];
        return a < b;
    });

    std::vector<int> region_of(n_b, -1);
    std::vector<int> overflow;
    std::vector<int> unplaced;
    for (int local : order) {
        int pick = -1;
        double pick_room = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < reachability.n_regions; ++r) {
            if (!reachability.reachable(local, r)) continue;
            if (!ledger.can_host(r, demands[local])) continue;
            const double room = ledger.remaining_bandwidth(r);
            if (room > pick_room) {
                pick_room = room;
                pick = r;
            }
        }
        if (pick >= 0) {
            ledger.commit(pick, demands[local]);
            region_of[local] = pick;
        } else {
            detail::overflow_or_collect(local, demands[local], overflow_region, ledger, region_of,
                                        overflow, unplaced);
        }
    }
    if (!unplaced.empty()) detail::throw_unplaced(unplaced, w);
    return detail::finalize(std::move(region_of), demands, reachability.n_regions,
                            std::move(overflow));
}

/// Computation-balancing baseline: broadcasters in descending compute order,
/// each to the reachable region with the most remaining compute.
inline Assignment lb_c_assign(const SlotWorkload& w, const UtilityTable& reachability,
                              const std::vector<Demand>& demands, CapacityLedger& ledger,
                              int overflow_region) {
    const int n_b = w.size();
    std::vector<int> order(n_b);
    for (int b = 0; b < n_b; ++b) order[b] = b;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (demands[a].compute != demands[b].compute) return demands[a].compute > demands[b].compute;
        return a < b;
    });

    std::vector<int> region_of(n_b, -1);
    std::vector<int> overflow;
    std::vector<int> unplaced;
    for (int local : order) {
        int pick = -1;
        double pick_room = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < reachability.n_regions; ++r) {
            if (!reachability.reachable(local, r)) continue;
            if (!ledger.can_host(r, demands[local])) continue;
            const double room = ledger.remaining_compute(r);
            if (room > pick_room) {
                pick_room = room;
                pick = r;
            }
        }
        if (pick >= 0) {
            ledger.commit(pick, demands[local]);
            region_of[local] = pick;
        } else {
            detail::overflow_or_collect(local, demands[local], overflow_region, ledger, region_of,
                                        overflow, unplaced);
        }
    }
    if (!unplaced.empty()) detail::throw_unplaced(unplaced, w);
    return detail::finalize(std::move(region_of), demands, reachability.n_regions,
                            std::move(overflow));
}

}  // namespace hycls
