#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hycls/common.hpp"

namespace hycls {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A transcoding rendition: label keys the delivery-latency tables.
struct Version {
    std::string label;
    double bitrate_kbps = 0.0;
};

/// Per-day, per-slot binary live/idle schedule of one broadcaster.
struct ActivityMatrix {
    int days = 0;
    int slots_per_day = 0;
    std::vector<std::uint8_t> cells;  // row-major, days x slots_per_day, values 0/1

    static ActivityMatrix zeros(int days, int slots_per_day) {
        ActivityMatrix a;
        a.days = days;
        a.slots_per_day = slots_per_day;
        a.cells.assign(static_cast<std::size_t>(days) * slots_per_day, 0);
        return a;
    }

    std::uint8_t at(int day, int slot) const {
        return cells[static_cast<std::size_t>(day) * slots_per_day + slot];
    }
    void set(int day, int slot, bool live) {
        cells[static_cast<std::size_t>(day) * slots_per_day + slot] = live ? 1 : 0;
    }

    /// Row window [first_day, first_day + n_days) as a new matrix.
    ActivityMatrix window(int first_day, int n_days) const {
        ActivityMatrix w = zeros(n_days, slots_per_day);
        for (int d = 0; d < n_days; ++d) {
            const int src = first_day + d;
            if (src < 0 || src >= days) continue;
            std::copy_n(cells.begin() + static_cast<std::size_t>(src) * slots_per_day,
                        slots_per_day,
                        w.cells.begin() + static_cast<std::size_t>(d) * slots_per_day);
        }
        return w;
    }
};

/// Expected audience of one rendition.
struct VersionAudience {
    Version version;
    double viewers = 0.0;  // N_{b,v}
};

struct BroadcasterProfile {
    int ord = -1;        // dense roster index, used for stable jitter hashing
    std::string id;
    bool partner = false;           // partners get the adaptive ladder
    double source_bitrate_kbps = 0.0;
    double compute_demand = 0.0;    // compute-units per slot for this ladder
    double bandwidth_demand_mbps = 0.0;  // ingest + egress of produced renditions
    ActivityMatrix activity;
    std::vector<VersionAudience> viewer_dist;  // non-partner: single source entry
};

enum class RegionKind { Dedicated, PublicCloud };

struct Region {
    std::string id;
    RegionKind kind = RegionKind::PublicCloud;
    double bandwidth_cap_mbps = 0.0;   // W_r
    double compute_cap = 0.0;          // C_r
    double instance_bandwidth_mbps = 0.0;  // bandwidth of one leased instance
    double unit_compute = 0.0;             // compute-units of one leased instance
    double price_bandwidth = 0.0;      // per instance-slot
    double price_compute = 0.0;        // per instance-slot
    std::map<std::string, double> delivery_latency_s;  // version label -> seconds

    /// Lease indicator: only public-cloud regions accrue lease cost.
    bool leased() const { return kind == RegionKind::PublicCloud; }
};

/// Region compute-utilization band; transcode latency is keyed by band.
enum class LoadBand : int { Low = 0, Medium = 1, High = 2 };

inline LoadBand band_for_utilization(double utilization, double low_hi, double med_hi) {
    if (utilization < low_hi) return LoadBand::Low;
    if (utilization < med_hi) return LoadBand::Medium;
    return LoadBand::High;
}

/// Transcode latency grid: seconds per (input bitrate, output bitrate, band).
/// Bitrates snap up to the nearest grid point; above-grid queries are
/// configuration errors. Entries must be non-decreasing in both bitrates.
struct TranscodeTable {
    std::vector<double> grid_kbps;           // sorted ascending
    std::vector<std::vector<double>> bands;  // [band][i_in * n + i_out]

    int snap_index(double q_kbps) const {
        const auto it = std::lower_bound(grid_kbps.begin(), grid_kbps.end(), q_kbps);
        if (it == grid_kbps.end()) {
            throw ConfigError("transcode table has no grid point >= " + std::to_string(q_kbps) +
                              " kbps");
        }
        return static_cast<int>(it - grid_kbps.begin());
    }

    double lookup(double q_in_kbps, double q_out_kbps, LoadBand band) const {
        const auto b = static_cast<std::size_t>(band);
        if (b >= bands.size()) {
            throw ConfigError("transcode table missing load band " + std::to_string(int(band)));
        }
        const int i = snap_index(q_in_kbps);
        const int j = snap_index(q_out_kbps);
        return bands[b][static_cast<std::size_t>(i) * grid_kbps.size() + j];
    }

    /// Enforces monotonicity in both directions within every band.
    void validate() const {
        const std::size_t n = grid_kbps.size();
        if (n == 0) throw ConfigError("transcode table has an empty bitrate grid");
        for (std::size_t i = 1; i < n; ++i) {
            if (grid_kbps[i] <= grid_kbps[i - 1])
                throw ConfigError("transcode grid not strictly increasing");
        }
        for (std::size_t b = 0; b < bands.size(); ++b) {
            if (bands[b].size() != n * n)
                throw ConfigError("transcode band " + std::to_string(b) + " has wrong size");
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double v = bands[b][i * n + j];
                    if (v < 0.0) throw ConfigError("negative transcode latency");
                    if (i > 0 && v < bands[b][(i - 1) * n + j])
                        throw ConfigError("transcode latency decreasing in input bitrate");
                    if (j > 0 && v < bands[b][i * n + j - 1])
                        throw ConfigError("transcode latency decreasing in output bitrate");
                }
            }
        }
    }
};

/// Synthesized link latencies: per-region base plus a stable per-(b,r) jitter.
struct LinkSynthesis {
    std::uint64_t seed = 0;
    std::vector<double> base_s;    // by region index
    std::vector<double> jitter_s;  // by region index, uniform [0, jitter)
};

/// Link + transcode latency source. Explicit entries take precedence over the
/// synthesized fallback; a query covered by neither is a configuration error.
struct LatencyModel {
    std::map<std::tuple<int, int, int>, double> link_slot_s;  // (ord, region, slot)
    std::map<std::pair<int, int>, double> link_s;             // (ord, region)
    std::optional<LinkSynthesis> synth;
    TranscodeTable transcode;

    double link(int broadcaster_ord, int region_index, int slot) const {
        if (!link_slot_s.empty()) {
            const auto it = link_slot_s.find({broadcaster_ord, region_index, slot});
            if (it != link_slot_s.end()) return it->second;
        }
        if (!link_s.empty()) {
            const auto it = link_s.find({broadcaster_ord, region_index});
            if (it != link_s.end()) return it->second;
        }
        if (synth && region_index >= 0 &&
            region_index < static_cast<int>(synth->base_s.size())) {
            return synth->base_s[region_index] +
                   synth->jitter_s[region_index] *
                       hash_unit(synth->seed, static_cast<std::uint64_t>(broadcaster_ord),
                                 static_cast<std::uint64_t>(region_index));
        }
        throw ConfigError("no link latency for (broadcaster=" + std::to_string(broadcaster_ord) +
                          ", region=" + std::to_string(region_index) +
                          ", slot=" + std::to_string(slot) + ")");
    }
};

struct GainParams {
    double alpha = 1.0;
    double beta = 0.011;  // per-second, > 0
};

/// One slot's live population partitioned into crowdsourced events.
/// `broadcasters` holds roster ords; events index into it (local indices).
struct SlotWorkload {
    int slot = 0;
    std::vector<int> broadcasters;
    std::vector<std::vector<int>> events;

    int size() const { return static_cast<int>(broadcasters.size()); }

    /// Partition check: events disjoint, non-empty, covering all members.
    bool valid_partition() const {
        std::vector<char> seen(broadcasters.size(), 0);
        std::size_t covered = 0;
        for (const auto& e : events) {
            if (e.empty()) return false;
            for (int local : e) {
                if (local < 0 || local >= size() || seen[local]) return false;
                seen[local] = 1;
                ++covered;
            }
        }
        return covered == broadcasters.size();
    }
};

/// Per-slot mapping local broadcaster -> region, with consumption tallies.
struct Assignment {
    std::vector<int> region_of;               // local index -> region index (-1 = unassigned)
    std::vector<double> bandwidth_by_region;  // W_r tallies (Mbps)
    std::vector<double> compute_by_region;    // C_r tallies (compute-units)
    std::vector<int> overflow;                // local indices placed by the overflow rule

    bool complete() const {
        for (int r : region_of)
            if (r < 0) return false;
        return true;
    }
};

/// Dense (broadcaster x region) utility matrix. kNegInf marks pairs that are
/// unreachable or whose gain left the model's domain; assignment algorithms
/// skip those uniformly.
struct UtilityTable {
    int n_broadcasters = 0;
    int n_regions = 0;
    std::vector<double> values;

    static UtilityTable filled(int n_b, int n_r, double v) {
        UtilityTable t;
        t.n_broadcasters = n_b;
        t.n_regions = n_r;
        t.values.assign(static_cast<std::size_t>(n_b) * n_r, v);
        return t;
    }

    double at(int b, int r) const {
        return values[static_cast<std::size_t>(b) * n_regions + r];
    }
    void set(int b, int r, double v) {
        values[static_cast<std::size_t>(b) * n_regions + r] = v;
    }
    bool reachable(int b, int r) const { return at(b, r) > kNegInf; }
};

// ---------------------------------------------------------------------------
// Math core
// ---------------------------------------------------------------------------

/// Broadcast latency: link + transcode + delivery for one (b, r, v) triple.
/// Upscale requests clamp to the source bitrate: q_b <= q_v looks up (q_b, q_b).
inline double broadcast_latency(const BroadcasterProfile& b, const Region& region,
                                int region_index, const Version& v, const LatencyModel& lm,
                                int slot, LoadBand band) {
    const double link = lm.link(b.ord, region_index, slot);
    const double q_in = b.source_bitrate_kbps;
    const double q_out = q_in <= v.bitrate_kbps ? q_in : v.bitrate_kbps;
    const double transcode = lm.transcode.lookup(q_in, q_out, band);
    const auto it = region.delivery_latency_s.find(v.label);
    if (it == region.delivery_latency_s.end()) {
        throw ConfigError("region " + region.id + " has no delivery latency for version \"" +
                          v.label + "\"");
    }
    return link + transcode + it->second;
}

/// Latency gain alpha + ln(1 - beta L); strictly decreasing in L.
/// Throws std::domain_error once 1 - beta L <= 0 (latency beyond model validity).
inline double gain(const GainParams& p, double latency_s) {
    const double arg = 1.0 - p.beta * latency_s;
    if (arg <= 0.0) {
        throw std::domain_error("gain undefined: 1 - beta*L = " + std::to_string(arg) +
                                " for L = " + std::to_string(latency_s));
    }
    return p.alpha + std::log(arg);
}

/// gain() without the throw; empty when the latency is out of domain.
inline std::optional<double> try_gain(const GainParams& p, double latency_s) {
    const double arg = 1.0 - p.beta * latency_s;
    if (arg <= 0.0) return std::nullopt;
    return p.alpha + std::log(arg);
}

/// Viewer-weighted gain over an explicit audience (engine passes the per-slot
/// audience; the profile overload below uses the stored expectation).
/// Any out-of-domain version makes the whole option infeasible (kNegInf).
inline double utility_over(const BroadcasterProfile& b,
                           const std::vector<VersionAudience>& audience, const Region& region,
                           int region_index, const LatencyModel& lm, const GainParams& p,
                           int slot, LoadBand band) {
    double sum = 0.0;
    for (const auto& va : audience) {
        const double latency = broadcast_latency(b, region, region_index, va.version, lm, slot, band);
        const auto g = try_gain(p, latency);
        if (!g) return kNegInf;
        sum += *g * va.viewers;
    }
    return sum;
}

inline double utility(const BroadcasterProfile& b, const Region& region, int region_index,
                      const LatencyModel& lm, const GainParams& p, int slot,
                      LoadBand band = LoadBand::Low) {
    return utility_over(b, b.viewer_dist, region, region_index, lm, p, slot, band);
}

/// Per-event minimum utilities under an assignment, plus the global minimum.
struct ObjectiveReport {
    std::vector<double> event_min;  // by event index
    double global_min = 0.0;

    double sum() const {
        double s = 0.0;
        for (double v : event_min) s += v;
        return s;
    }
};

inline ObjectiveReport objective(const Assignment& assign, const SlotWorkload& w,
                                 const UtilityTable& utilities) {
    ObjectiveReport rep;
    rep.event_min.reserve(w.events.size());
    double global = std::numeric_limits<double>::infinity();
    for (const auto& event : w.events) {
        double lo = std::numeric_limits<double>::infinity();
        for (int local : event) {
            lo = std::min(lo, utilities.at(local, assign.region_of[local]));
        }
        rep.event_min.push_back(lo);
        global = std::min(global, lo);
    }
    rep.global_min = w.events.empty() ? 0.0 : global;
    return rep;
}

}  // namespace hycls
