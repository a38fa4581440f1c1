#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hycls/assign.hpp"
#include "hycls/model.hpp"
#include "hycls/stability.hpp"
#include "hycls/trace.hpp"

namespace hycls {

enum class Strategy { HyCLS, LbV, LbC };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::HyCLS: return "hycls";
        case Strategy::LbV: return "lb-v";
        case Strategy::LbC: return "lb-c";
    }
    return "?";
}

inline std::optional<Strategy> strategy_from_name(const std::string& name) {
    if (name == "hycls") return Strategy::HyCLS;
    if (name == "lb-v" || name == "lbv") return Strategy::LbV;
    if (name == "lb-c" || name == "lbc") return Strategy::LbC;
    return std::nullopt;
}

struct SimConfig {
    GainParams gain{1.0, 0.011};
    int slot_minutes = 5;
    int slots_per_day = 288;
    int si_history_days = 2;
    double initial_threshold = 0.0;
    double offload_trigger = 0.60;
    SiNormalization si_normalization = SiNormalization::PaperVerbatim;
    SiZeroDenomPolicy si_zero_policy = SiZeroDenomPolicy::PerTermZero;
    double bandwidth_budget = 1e18;  // K_w, per slot
    double compute_budget = 1e18;    // K_c, per slot
    bool strict_budget = false;
    Strategy strategy = Strategy::HyCLS;
    std::vector<Region> regions;
    int dedicated_region = 0;  // offload target and overflow host
    LatencyModel latency;
    ProfileParams profile;
    double band_low_hi = 0.5;   // compute-utilization band boundaries
    double band_med_hi = 0.8;
    double migration_latency_penalty_s = 0.0;  // sensitivity hook, default off
    std::uint64_t seed = 1;

    void validate() const {
        if (regions.empty()) throw ConfigError("no regions configured");
        if (dedicated_region < 0 || dedicated_region >= static_cast<int>(regions.size()))
            throw ConfigError("dedicated_region index out of range");
        if (regions[dedicated_region].kind != RegionKind::Dedicated)
            throw ConfigError("dedicated_region must reference a Dedicated region");
        if (bandwidth_budget <= 0.0 || compute_budget <= 0.0)
            throw ConfigError("budgets must be positive");
        if (gain.beta <= 0.0) throw ConfigError("gain beta must be positive");
        if (si_history_days < 1) throw ConfigError("si_history_days must be >= 1");
        if (offload_trigger <= 0.0 || offload_trigger > 1.0)
            throw ConfigError("offload trigger must be in (0, 1]");
        latency.transcode.validate();
    }
};

struct Violation {
    int slot = 0;
    std::string region_id;  // empty for budget violations
    std::string kind;       // bandwidth_capacity | compute_capacity | bandwidth_budget | compute_budget
    double amount = 0.0;    // overshoot
};

struct SlotReport {
    int slot = 0;
    int live = 0;
    int arrivals = 0;
    std::vector<double> bandwidth_by_region;
    std::vector<double> compute_by_region;
    double bandwidth_cost = 0.0;
    double compute_cost = 0.0;
    double objective_min = 0.0;  // min over events of per-event min utility
    std::vector<double> event_min;
    int migrations = 0;
    int continuing = 0;  // live at t-1 and t
    double migration_fraction = 0.0;
    std::vector<Violation> violations;
    double threshold_h = 0.0;
    int dedicated_hosted = 0;
    int cloud_hosted = 0;
    int overflow_count = 0;
    int offload_overrides = 0;  // arrivals whose placement class had no room
    int pruning_fallbacks = 0;  // events with no common reachable region
};

struct SimReport {
    std::string strategy;
    std::uint64_t seed = 0;
    std::vector<SlotReport> slots;
    double total_bandwidth_cost = 0.0;
    double total_compute_cost = 0.0;
    double total_cost = 0.0;
    std::optional<double> normalized_cost;  // total / LB-C total, filled by comparisons
    long total_migrations = 0;
    long total_continuing = 0;
    double avg_migration_fraction = 0.0;   // total migrations / total continuing
    double peak_migration_fraction = 0.0;  // max per-slot fraction
    std::vector<double> daily_migration_fraction;
    long violation_count = 0;
    long overflow_total = 0;
    long offload_override_total = 0;
};

/// Eq-style lease cost on integral instances: dedicated regions are free,
/// public-cloud regions lease ceil(use / unit) instances per resource.
inline LeaseCosts lease_cost(const std::vector<double>& bandwidth_by_region,
                             const std::vector<double>& compute_by_region,
                             const std::vector<Region>& regions) {
    LeaseCosts c;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        if (!regions[r].leased()) continue;
        c.bandwidth += CapacityLedger::instances(bandwidth_by_region[r],
                                                 regions[r].instance_bandwidth_mbps) *
                       regions[r].price_bandwidth;
        c.compute +=
            CapacityLedger::instances(compute_by_region[r], regions[r].unit_compute) *
            regions[r].price_compute;
    }
    return c;
}

/// Reports capacity overshoots (Eqs. on bandwidth/compute) and budget
/// overruns. Violations are observable, never fatal here: the bandwidth side
/// is relaxed during assignment by design, and a compute overshoot would mean
/// an assigner bug (the engine escalates that separately in strict mode).
inline std::vector<Violation> check_constraints(int slot,
                                                const std::vector<double>& bandwidth_by_region,
                                                const std::vector<double>& compute_by_region,
                                                const std::vector<Region>& regions,
                                                double bandwidth_budget, double compute_budget,
                                                const LeaseCosts& costs) {
    constexpr double kEps = 1e-9;
    std::vector<Violation> out;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        if (bandwidth_by_region[r] > regions[r].bandwidth_cap_mbps * (1.0 + kEps) + kEps) {
            out.push_back({slot, regions[r].id, "bandwidth_capacity",
                           bandwidth_by_region[r] - regions[r].bandwidth_cap_mbps});
        }
        if (compute_by_region[r] > regions[r].compute_cap * (1.0 + kEps) + kEps) {
            out.push_back({slot, regions[r].id, "compute_capacity",
                           compute_by_region[r] - regions[r].compute_cap});
        }
    }
    if (costs.bandwidth > bandwidth_budget * (1.0 + kEps)) {
        out.push_back({slot, "", "bandwidth_budget", costs.bandwidth - bandwidth_budget});
    }
    if (costs.compute > compute_budget * (1.0 + kEps)) {
        out.push_back({slot, "", "compute_budget", costs.compute - compute_budget});
    }
    return out;
}

/// Slot-by-slot simulation driver. Feed it each slot's live streams in
/// increasing slot order; state (threshold H, SI cache, previous placement)
/// carries across calls. Single-threaded by design.
class Engine {
public:
    Engine(SimConfig config, const std::vector<BroadcasterProfile>& roster)
        : cfg_(std::move(config)), roster_(roster) {
        cfg_.validate();
        stability_.threshold = cfg_.initial_threshold;
        stability_.trigger_utilization = cfg_.offload_trigger;
        stability_.normalization = cfg_.si_normalization;
        stability_.zero_policy = cfg_.si_zero_policy;
        prev_region_.assign(roster_.size(), -1);
        prev_compute_used_.assign(cfg_.regions.size(), 0.0);
        dedicated_bw_cap_ = 0.0;
        for (const auto& r : cfg_.regions)
            if (!r.leased()) dedicated_bw_cap_ += r.bandwidth_cap_mbps;
    }

    const SimConfig& config() const { return cfg_; }
    double threshold() const { return stability_.threshold; }
    double dedicated_utilization() const { return dedicated_bw_util_; }

    SlotReport step(const std::vector<LiveStream>& live_streams, int slot) {
        const int day = slot / cfg_.slots_per_day;
        if (day != current_day_) {
            stability_.si_cache.clear();  // SI windows shift at each day boundary
            current_day_ = day;
        }

        SlotReport rep;
        rep.slot = slot;

        // Deduplicate concurrent records of the same broadcaster.
        std::vector<LiveStream> live = dedupe(live_streams);
        rep.live = static_cast<int>(live.size());

        SlotWorkload w = derive_events(slot, live);
        const int n_b = w.size();
        const int n_r = static_cast<int>(cfg_.regions.size());

        // (1) classify arrivals through the initial-offloading rule
        std::vector<Placement> arrival_class(n_b, Placement::Dedicated);
        std::vector<char> is_arrival(n_b, 0);
        for (int local = 0; local < n_b; ++local) {
            const int ord = w.broadcasters[local];
            ensure_si(ord, day);
            if (prev_region_[ord] < 0) {
                is_arrival[local] = 1;
                ++rep.arrivals;
                arrival_class[local] =
                    initial_offload(roster_[ord], stability_, dedicated_bw_util_);
            }
        }

        // (2) H follows the mean SI of the current dedicated tenants
        {
            std::vector<double> dedicated_sis;
            for (std::size_t ord = 0; ord < roster_.size(); ++ord) {
                const int r = prev_region_[ord];
                if (r >= 0 && !cfg_.regions[r].leased()) {
                    ensure_si(static_cast<int>(ord), day);
                    dedicated_sis.push_back(stability_.cached_si(static_cast<int>(ord)));
                }
            }
            update_threshold(stability_, dedicated_sis);
        }
        rep.threshold_h = stability_.threshold;

        // (3) per-pair utilities, then the configured strategy
        std::vector<LoadBand> band(n_r);
        for (int r = 0; r < n_r; ++r) {
            const double cap = cfg_.regions[r].compute_cap;
            const double u = cap > 0.0 ? prev_compute_used_[r] / cap : 0.0;
            band[r] = band_for_utilization(u, cfg_.band_low_hi, cfg_.band_med_hi);
        }

        UtilityTable utilities = UtilityTable::filled(n_b, n_r, kNegInf);
        std::vector<Demand> demands(n_b);
        std::vector<double> viewer_counts(n_b, 0.0);
        for (int local = 0; local < n_b; ++local) {
            const int ord = w.broadcasters[local];
            const auto& p = roster_[ord];
            demands[local] = {p.compute_demand, p.bandwidth_demand_mbps};
            viewer_counts[local] = live[local].viewers;
            const auto audience = split_audience(live[local].viewers, p.source_bitrate_kbps,
                                                 p.partner, cfg_.profile);
            for (int r = 0; r < n_r; ++r) {
                utilities.set(local, r, pair_utility(p, audience, r, slot, band[r]));
            }
        }

        StrictBudget strict;
        strict.enabled = cfg_.strict_budget;
        strict.bandwidth_budget = cfg_.bandwidth_budget;
        strict.compute_budget = cfg_.compute_budget;
        CapacityLedger ledger(cfg_.regions, strict);

        Assignment assign;
        if (cfg_.strategy == Strategy::LbV) {
            assign = lb_v_assign(w, viewer_counts, utilities, demands, ledger,
                                 cfg_.dedicated_region);
        } else if (cfg_.strategy == Strategy::LbC) {
            assign = lb_c_assign(w, utilities, demands, ledger, cfg_.dedicated_region);
        } else {
            UtilityTable masked = utilities;
            rep.offload_overrides = apply_offload_masks(w, is_arrival, arrival_class, demands,
                                                        utilities, masked);
            prune_into(w, masked, scratch_cands_);
            rep.pruning_fallbacks = static_cast<int>(scratch_cands_.fallback_events.size());
            std::vector<double> price(n_r);
            for (int r = 0; r < n_r; ++r) price[r] = cfg_.regions[r].price_compute;
            assign = greedy_assign(w, scratch_cands_, demands, ledger, price,
                                   cfg_.dedicated_region);
        }
        rep.overflow_count = static_cast<int>(assign.overflow.size());

        // (4) accounting
        rep.bandwidth_by_region = assign.bandwidth_by_region;
        rep.compute_by_region = assign.compute_by_region;
        check_conservation(assign, demands, slot);
        const LeaseCosts costs =
            lease_cost(assign.bandwidth_by_region, assign.compute_by_region, cfg_.regions);
        rep.bandwidth_cost = costs.bandwidth;
        rep.compute_cost = costs.compute;
        rep.violations =
            check_constraints(slot, assign.bandwidth_by_region, assign.compute_by_region,
                              cfg_.regions, cfg_.bandwidth_budget, cfg_.compute_budget, costs);
        if (cfg_.strict_budget) {
            for (const auto& v : rep.violations) {
                if (v.kind == "compute_capacity") {
                    throw std::logic_error("compute capacity violated at slot " +
                                           std::to_string(slot) + " in region " + v.region_id +
                                           " (assigner bug)");
                }
            }
        }

        const ObjectiveReport obj = objective(assign, w, utilities);
        rep.event_min = obj.event_min;
        rep.objective_min = obj.global_min;

        for (int local = 0; local < n_b; ++local) {
            const int ord = w.broadcasters[local];
            const int prev = prev_region_[ord];
            if (prev >= 0) {
                ++rep.continuing;
                if (assign.region_of[local] != prev) ++rep.migrations;
            }
            if (cfg_.regions[assign.region_of[local]].leased())
                ++rep.cloud_hosted;
            else
                ++rep.dedicated_hosted;
        }
        rep.migration_fraction =
            rep.continuing > 0 ? static_cast<double>(rep.migrations) / rep.continuing : 0.0;

        // roll state forward
        std::fill(prev_region_.begin(), prev_region_.end(), -1);
        for (int local = 0; local < n_b; ++local)
            prev_region_[w.broadcasters[local]] = assign.region_of[local];
        prev_compute_used_ = assign.compute_by_region;
        double ded_bw = 0.0;
        for (int r = 0; r < n_r; ++r)
            if (!cfg_.regions[r].leased()) ded_bw += assign.bandwidth_by_region[r];
        dedicated_bw_util_ = dedicated_bw_cap_ > 0.0 ? ded_bw / dedicated_bw_cap_ : 0.0;
        return rep;
    }

private:
    std::vector<LiveStream> dedupe(const std::vector<LiveStream>& in) const {
        std::map<int, LiveStream> by_ord;
        for (const auto& ls : in) {
            auto [it, fresh] = by_ord.emplace(ls.ord, ls);
            if (!fresh) {
                it->second.viewers += ls.viewers;
                if ((it->second.event_key == nullptr || it->second.event_key->empty()) &&
                    ls.event_key != nullptr && !ls.event_key->empty()) {
                    it->second.event_key = ls.event_key;
                }
            }
        }
        std::vector<LiveStream> out;
        out.reserve(by_ord.size());
        for (auto& [ord, ls] : by_ord) out.push_back(ls);
        return out;
    }

    void ensure_si(int ord, int day) {
        if (stability_.si_cache.count(ord)) return;
        const auto& activity = roster_[ord].activity;
        const ActivityMatrix window =
            activity.window(day - cfg_.si_history_days, cfg_.si_history_days);
        stability_.si_cache[ord] =
            stable_index(window, cfg_.si_normalization, cfg_.si_zero_policy);
    }

    double pair_utility(const BroadcasterProfile& p, const std::vector<VersionAudience>& audience,
                        int r, int slot, LoadBand band) const {
        const Region& region = cfg_.regions[r];
        double extra = 0.0;
        if (cfg_.migration_latency_penalty_s > 0.0) {
            const int prev = prev_region_[p.ord];
            if (prev >= 0 && prev != r) extra = cfg_.migration_latency_penalty_s;
        }
        double sum = 0.0;
        for (const auto& va : audience) {
            double latency;
            try {
                latency = broadcast_latency(p, region, r, va.version, cfg_.latency, slot, band);
            } catch (const ConfigError&) {
                return kNegInf;  // unreachable pair
            }
            const auto g = try_gain(cfg_.gain, latency + extra);
            if (!g) return kNegInf;
            sum += *g * va.viewers;
        }
        return sum;
    }

    /// Restrict each arrival to its placement class for the arrival slot,
    /// provided the class still has projected compute room; otherwise leave
    /// the row open and count the override.
    int apply_offload_masks(const SlotWorkload& w, const std::vector<char>& is_arrival,
                            const std::vector<Placement>& arrival_class,
                            const std::vector<Demand>& demands, const UtilityTable& utilities,
                            UtilityTable& masked) const {
        const int n_r = masked.n_regions;
        std::vector<double> projected(n_r);
        for (int r = 0; r < n_r; ++r) projected[r] = cfg_.regions[r].compute_cap;
        // continuing broadcasters are not reserved here: the projection is a
        // headroom check for arrivals only
        int overrides = 0;
        for (int local = 0; local < w.size(); ++local) {
            if (!is_arrival[local]) continue;
            const bool want_cloud = arrival_class[local] == Placement::Cloud;
            double room = 0.0;
            int roomiest = -1;
            for (int r = 0; r < n_r; ++r) {
                if (cfg_.regions[r].leased() != want_cloud) continue;
                if (!utilities.reachable(local, r)) continue;
                if (projected[r] > room) {
                    room = projected[r];
                    roomiest = r;
                }
            }
            if (roomiest < 0 || room < demands[local].compute) {
                ++overrides;
                continue;
            }
            projected[roomiest] -= demands[local].compute;
            for (int r = 0; r < n_r; ++r) {
                if (cfg_.regions[r].leased() != want_cloud) masked.set(local, r, kNegInf);
            }
        }
        return overrides;
    }

    void check_conservation(const Assignment& assign, const std::vector<Demand>& demands,
                            int slot) const {
        double bw_t = 0.0, c_t = 0.0, bw_d = 0.0, c_d = 0.0;
        for (double v : assign.bandwidth_by_region) bw_t += v;
        for (double v : assign.compute_by_region) c_t += v;
        for (const auto& d : demands) {
            bw_d += d.bandwidth_mbps;
            c_d += d.compute;
        }
        const double tol = 1e-6 * (1.0 + bw_d + c_d);
        if (std::abs(bw_t - bw_d) > tol || std::abs(c_t - c_d) > tol) {
            throw std::logic_error("conservation broken at slot " + std::to_string(slot));
        }
    }

    SimConfig cfg_;
    std::vector<BroadcasterProfile> roster_;
    StabilityState stability_;
    std::vector<int> prev_region_;          // ord -> region at t-1, -1 when offline
    std::vector<double> prev_compute_used_; // per region, feeds the load bands
    double dedicated_bw_util_ = 0.0;
    double dedicated_bw_cap_ = 0.0;
    int current_day_ = -1;
    CandidateSet scratch_cands_;
};

/// Folds Engine::step over every slot of the trace.
inline SimReport run(const SimConfig& config, const TraceData& trace) {
    Engine engine(config, trace.roster);
    SimReport report;
    report.strategy = strategy_name(config.strategy);
    report.seed = config.seed;

    // interval sweep over records
    std::vector<std::vector<int>> starts(trace.total_slots);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        if (r.start_slot < trace.total_slots) starts[r.start_slot].push_back(static_cast<int>(i));
    }
    std::vector<int> active;
    std::vector<LiveStream> live;
    const int total_days = (trace.total_slots + config.slots_per_day - 1) / config.slots_per_day;
    std::vector<long> day_migrations(std::max(total_days, 1), 0);
    std::vector<long> day_continuing(std::max(total_days, 1), 0);

    for (int t = 0; t < trace.total_slots; ++t) {
        for (int idx : starts[t]) active.push_back(idx);
        live.clear();
        std::vector<int> still_active;
        still_active.reserve(active.size());
        for (int idx : active) {
            const auto& r = trace.records[idx];
            if (t < r.start_slot + r.duration_slots) {
                still_active.push_back(idx);
                live.push_back({trace.record_ord[idx], idx,
                                static_cast<double>(r.viewers[t - r.start_slot]),
                                &r.event_key});
            }
        }
        active.swap(still_active);

        SlotReport rep = engine.step(live, t);
        report.total_bandwidth_cost += rep.bandwidth_cost;
        report.total_compute_cost += rep.compute_cost;
        report.total_migrations += rep.migrations;
        report.total_continuing += rep.continuing;
        report.peak_migration_fraction =
            std::max(report.peak_migration_fraction, rep.migration_fraction);
        report.violation_count += static_cast<long>(rep.violations.size());
        report.overflow_total += rep.overflow_count;
        report.offload_override_total += rep.offload_overrides;
        const int day = t / config.slots_per_day;
        day_migrations[day] += rep.migrations;
        day_continuing[day] += rep.continuing;
        report.slots.push_back(std::move(rep));
    }
    report.total_cost = report.total_bandwidth_cost + report.total_compute_cost;
    report.avg_migration_fraction =
        report.total_continuing > 0
            ? static_cast<double>(report.total_migrations) / report.total_continuing
            : 0.0;
    for (int d = 0; d < total_days; ++d) {
        report.daily_migration_fraction.push_back(
            day_continuing[d] > 0 ? static_cast<double>(day_migrations[d]) / day_continuing[d]
                                  : 0.0);
    }
    return report;
}

}  // namespace hycls
