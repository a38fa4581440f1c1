#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hycls/common.hpp"
#include "hycls/model.hpp"

namespace hycls {

inline constexpr const char* kTraceSchema = "hycls-trace/1";

/// One live-streaming session as stored in the JSONL trace.
struct StreamRecord {
    std::string broadcaster_id;
    int start_slot = 0;
    int duration_slots = 0;
    std::string event_key;      // empty = not part of a crowdsourced event
    std::vector<int> viewers;   // one entry per live slot
    int bitrate_kbps = 0;
    bool partner = false;
};

struct LineDiagnostic {
    int line = 0;
    std::string message;
};

struct TraceLoadResult {
    std::vector<StreamRecord> records;
    std::vector<LineDiagnostic> diagnostics;
    bool aborted = false;   // header failure or malformed fraction above the cap
    int total_lines = 0;    // record lines seen (excluding the header)

    bool clean() const { return !aborted && diagnostics.empty(); }
};

namespace detail {

inline std::optional<std::string> validate_record(const StreamRecord& r) {
    if (r.broadcaster_id.empty()) return "broadcaster_id is empty";
    if (r.start_slot < 0) return "start_slot is negative";
    if (r.duration_slots < 1) return "duration_slots must be >= 1";
    if (static_cast<int>(r.viewers.size()) != r.duration_slots)
        return "viewers length " + std::to_string(r.viewers.size()) + " != duration_slots " +
               std::to_string(r.duration_slots);
    for (int v : r.viewers)
        if (v < 0) return "negative viewer count";
    if (r.bitrate_kbps <= 0) return "bitrate_kbps must be positive";
    return std::nullopt;
}

inline StreamRecord record_from_json(const nlohmann::json& j) {
    StreamRecord r;
    r.broadcaster_id = j.at("broadcaster_id").get<std::string>();
    r.start_slot = j.at("start_slot").get<int>();
    r.duration_slots = j.at("duration_slots").get<int>();
    r.event_key = j.at("event_key").get<std::string>();
    r.viewers = j.at("viewers").get<std::vector<int>>();
    r.bitrate_kbps = j.at("bitrate_kbps").get<int>();
    r.partner = j.at("partner").get<bool>();
    return r;
}

inline nlohmann::json record_to_json(const StreamRecord& r) {
    return nlohmann::json{{"broadcaster_id", r.broadcaster_id},
                          {"start_slot", r.start_slot},
                          {"duration_slots", r.duration_slots},
                          {"event_key", r.event_key},
                          {"viewers", r.viewers},
                          {"bitrate_kbps", r.bitrate_kbps},
                          {"partner", r.partner}};
}

}  // namespace detail

/// Parses a JSONL trace. Malformed lines are collected with their line
/// numbers; when more than `malformed_abort_fraction` of the lines are bad
/// the load aborts (mirrors the source datasets' outlier-removal discipline).
inline TraceLoadResult load_trace_stream(std::istream& in,
                                         double malformed_abort_fraction = 0.01) {
    TraceLoadResult out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            try {
                const auto j = nlohmann::json::parse(line);
                if (!j.is_object() || j.value("schema", std::string()) != kTraceSchema) {
                    out.diagnostics.push_back({line_no, "missing or wrong schema header, expected "
                                                        "{\"schema\":\"" +
                                                            std::string(kTraceSchema) + "\"}"});
                    out.aborted = true;
                    return out;
                }
            } catch (const nlohmann::json::exception& e) {
                out.diagnostics.push_back({line_no, std::string("bad header: ") + e.what()});
                out.aborted = true;
                return out;
            }
            header_seen = true;
            continue;
        }
        ++out.total_lines;
        try {
            const auto j = nlohmann::json::parse(line);
            StreamRecord r = detail::record_from_json(j);
            if (auto err = detail::validate_record(r)) {
                out.diagnostics.push_back({line_no, *err});
            } else {
                out.records.push_back(std::move(r));
            }
        } catch (const nlohmann::json::exception& e) {
            out.diagnostics.push_back({line_no, std::string("parse error: ") + e.what()});
        }
    }
    if (!header_seen) {
        out.diagnostics.push_back({0, "empty file: schema header line is required"});
        out.aborted = true;
        return out;
    }
    if (out.total_lines > 0 &&
        static_cast<double>(out.diagnostics.size()) >
            malformed_abort_fraction * out.total_lines) {
        out.aborted = true;
    }
    return out;
}

inline TraceLoadResult load_trace(const std::string& path,
                                  double malformed_abort_fraction = 0.01) {
    std::ifstream in(path);
    if (!in) {
        TraceLoadResult out;
        out.aborted = true;
        out.diagnostics.push_back({0, "cannot open " + path});
        return out;
    }
    return load_trace_stream(in, malformed_abort_fraction);
}

inline void save_trace_stream(const std::vector<StreamRecord>& records, std::ostream& out) {
    out << nlohmann::json{{"schema", kTraceSchema}}.dump() << "\n";
    for (const auto& r : records) out << detail::record_to_json(r).dump() << "\n";
}

inline void save_trace(const std::vector<StreamRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trace file " + path);
    save_trace_stream(records, out);
}

// ---------------------------------------------------------------------------
// Profile derivation
// ---------------------------------------------------------------------------

/// How profiles and resource demands are derived from raw records.
struct ProfileParams {
    std::vector<Version> transcode_ladder = {{"720p", 2500.0},
                                             {"480p", 1300.0},
                                             {"360p", 800.0},
                                             {"240p", 500.0}};
    // audience share per version label; "source" covers the pass-through copy
    std::map<std::string, double> version_shares = {
        {"source", 0.35}, {"720p", 0.30}, {"480p", 0.20}, {"360p", 0.10}, {"240p", 0.05}};
    double compute_base = 0.5;      // ingest + packaging, compute-units
    double compute_per_mbps = 1.0;  // per Mbps of transcoded output
};

/// A rendition never exceeds the source bitrate (upscales clamp).
inline double produced_bitrate_kbps(double q_v, double q_b) { return std::min(q_v, q_b); }

inline double compute_demand_for(double source_kbps, bool partner, const ProfileParams& pp) {
    if (!partner) return pp.compute_base;
    double transcoded_kbps = 0.0;
    for (const auto& v : pp.transcode_ladder)
        transcoded_kbps += produced_bitrate_kbps(v.bitrate_kbps, source_kbps);
    return pp.compute_base + pp.compute_per_mbps * transcoded_kbps / 1000.0;
}

/// Ingest plus egress of every produced rendition, in Mbps.
inline double bandwidth_demand_for(double source_kbps, bool partner, const ProfileParams& pp) {
    double produced_kbps = source_kbps;  // the source copy is always served
    if (partner) {
        for (const auto& v : pp.transcode_ladder)
            produced_kbps += produced_bitrate_kbps(v.bitrate_kbps, source_kbps);
    }
    return (source_kbps + produced_kbps) / 1000.0;
}

/// Version ladder actually produced for a broadcaster (source first).
inline std::vector<Version> ladder_for(double source_kbps, bool partner,
                                       const ProfileParams& pp) {
    std::vector<Version> ladder{{"source", source_kbps}};
    if (partner)
        for (const auto& v : pp.transcode_ladder) ladder.push_back(v);
    return ladder;
}

/// Splits an audience of `total` viewers across the ladder by the configured
/// shares (renormalized); non-partners put everything on the source copy.
inline std::vector<VersionAudience> split_audience(double total, double source_kbps,
                                                   bool partner, const ProfileParams& pp) {
    std::vector<VersionAudience> out;
    if (!partner) {
        out.push_back({{"source", source_kbps}, total});
        return out;
    }
    const auto ladder = ladder_for(source_kbps, partner, pp);
    double share_sum = 0.0;
    for (const auto& v : ladder) {
        const auto it = pp.version_shares.find(v.label);
        share_sum += it == pp.version_shares.end() ? 0.0 : it->second;
    }
    for (const auto& v : ladder) {
        const auto it = pp.version_shares.find(v.label);
        const double share = it == pp.version_shares.end() ? 0.0 : it->second;
        out.push_back({v, share_sum > 0.0 ? total * share / share_sum : 0.0});
    }
    return out;
}

/// Records plus the derived per-broadcaster roster.
struct TraceData {
    std::vector<StreamRecord> records;
    std::vector<BroadcasterProfile> roster;  // ord = index
    std::vector<int> record_ord;             // record index -> roster ord
    int slots_per_day = 288;
    int total_slots = 0;
    int days = 0;
};

inline TraceData derive_profiles(std::vector<StreamRecord> records, int slots_per_day,
                                 const ProfileParams& pp) {
    TraceData td;
    td.slots_per_day = slots_per_day;
    td.records = std::move(records);
    td.record_ord.resize(td.records.size());

    std::map<std::string, int> ord_of;
    for (std::size_t i = 0; i < td.records.size(); ++i) {
        const auto& r = td.records[i];
        td.total_slots = std::max(td.total_slots, r.start_slot + r.duration_slots);
        auto [it, fresh] = ord_of.emplace(r.broadcaster_id, static_cast<int>(ord_of.size()));
        td.record_ord[i] = it->second;
        (void)fresh;
    }
    td.days = (td.total_slots + slots_per_day - 1) / slots_per_day;
    if (td.days == 0) td.days = 1;

    td.roster.resize(ord_of.size());
    for (const auto& [id, ord] : ord_of) {
        auto& p = td.roster[ord];
        p.ord = ord;
        p.id = id;
        p.activity = ActivityMatrix::zeros(td.days, slots_per_day);
    }
    std::vector<double> viewer_sum(td.roster.size(), 0.0);
    std::vector<int> live_slots(td.roster.size(), 0);
    for (std::size_t i = 0; i < td.records.size(); ++i) {
        const auto& r = td.records[i];
        auto& p = td.roster[td.record_ord[i]];
        p.partner = p.partner || r.partner;
        p.source_bitrate_kbps = std::max(p.source_bitrate_kbps, double(r.bitrate_kbps));
        for (int k = 0; k < r.duration_slots; ++k) {
            const int t = r.start_slot + k;
            p.activity.set(t / slots_per_day, t % slots_per_day, true);
            viewer_sum[p.ord] += r.viewers[k];
            live_slots[p.ord] += 1;
        }
    }
    for (auto& p : td.roster) {
        p.compute_demand = compute_demand_for(p.source_bitrate_kbps, p.partner, pp);
        p.bandwidth_demand_mbps = bandwidth_demand_for(p.source_bitrate_kbps, p.partner, pp);
        const double mean_viewers =
            live_slots[p.ord] > 0 ? viewer_sum[p.ord] / live_slots[p.ord] : 0.0;
        p.viewer_dist = split_audience(mean_viewers, p.source_bitrate_kbps, p.partner, pp);
    }
    return td;
}

// ---------------------------------------------------------------------------
// Event derivation
// ---------------------------------------------------------------------------

/// One stream live at the slot under consideration.
struct LiveStream {
    int ord = -1;
    int record_index = -1;
    double viewers = 0.0;
    const std::string* event_key = nullptr;  // nullptr or empty = no event
};

/// Groups co-live streams sharing an event key; everyone else becomes a
/// singleton event. The result is a valid partition of the live set.
inline SlotWorkload derive_events(int slot, const std::vector<LiveStream>& live) {
    SlotWorkload w;
    w.slot = slot;
    w.broadcasters.reserve(live.size());
    for (const auto& ls : live) w.broadcasters.push_back(ls.ord);

    std::map<std::string, std::vector<int>> keyed;
    std::vector<int> singles;
    for (std::size_t i = 0; i < live.size(); ++i) {
        if (live[i].event_key != nullptr && !live[i].event_key->empty()) {
            keyed[*live[i].event_key].push_back(static_cast<int>(i));
        } else {
            singles.push_back(static_cast<int>(i));
        }
    }
    for (auto& [key, members] : keyed) w.events.push_back(std::move(members));
    for (int s : singles) w.events.push_back({s});
    return w;
}

// ---------------------------------------------------------------------------
// Synthetic workload generation
// ---------------------------------------------------------------------------

struct DiurnalProfile {
    double base = 0.0;       // rate at the quietest time, per slot at full scale
    double peak_extra = 0.0; // added on top of base at the peak
    double peak_center = 11.0 / 24.0;  // fraction of the day
    double peak_width = 0.15;          // gaussian width, fraction of the day

    double rate(int slot_of_day, int slots_per_day) const {
        const double x = static_cast<double>(slot_of_day) / slots_per_day;
        const double d = (x - peak_center) / peak_width;
        return base + peak_extra * std::exp(-0.5 * d * d);
    }
};

struct GeneratorParams {
    int broadcasters = 10000;
    int days = 28;
    int slots_per_day = 288;  // five-minute slots
    std::uint64_t seed = 1;

    // popularity: rank-based peak capacity C / rank^s with lognormal noise
    double zipf_exponent = 1.15;
    double peak_noise_sigma = 0.15;
    double popular_cutoff_viewers = 8.0;   // below = unpopular
    double target_popular_fraction = 0.10; // anchors the Zipf scale C

    // session durations (minutes), lognormal pinned by median and 80th pct
    double unpopular_duration_median_min = 35.0;
    double unpopular_duration_q80_min = 83.0;
    double popular_duration_median_min = 136.0;
    double popular_duration_q80_min = 267.0;

    // arrivals per slot at full scale, linearly scaled by broadcasters/reference
    double reference_population = 1500000.0;
    DiurnalProfile unpopular_arrivals{400.0, 1400.0, 11.0 / 24.0, 0.15};
    DiurnalProfile popular_arrivals{80.0, 200.0, 11.0 / 24.0, 0.18};
    int popular_window_slots = 18;  // how far a popular start may drift from habit

    // crowdsourced events
    double events_per_day_mean = 4.0;
    int max_concurrent_events = 12;
    int event_min_size = 2;
    int event_max_size = 12;
    double event_member_popular_prob = 0.6;

    // source bitrates (kbps) with draw weights
    std::vector<int> source_bitrates = {3500, 3000, 2500, 2000, 1500};
    std::vector<double> bitrate_weights = {0.15, 0.25, 0.25, 0.20, 0.15};
    double partner_fraction = 0.03;  // top ranks stream as partners

    // session peak as a fraction of the broadcaster's capacity
    double session_peak_min_frac = 0.6;
};

namespace detail {

inline double lognormal_sigma(double median, double q80) {
    // z such that Phi(z) = 0.80
    constexpr double kZ80 = 0.8416212335729143;
    return (std::log(q80) - std::log(median)) / kZ80;
}

inline int draw_weighted(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = rng.next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        x -= weights[i];
        if (x < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

/// Triangular ramp: up to the peak mid-session, back down.
inline std::vector<int> viewer_series(double peak, int duration) {
    std::vector<int> v(duration);
    if (duration == 1) {
        v[0] = static_cast<int>(std::lround(peak));
        return v;
    }
    const int mid = (duration - 1) / 2;
    for (int i = 0; i < duration; ++i) {
        const double frac = i <= mid ? static_cast<double>(i + 1) / (mid + 1)
                                     : static_cast<double>(duration - i) / (duration - mid);
        v[i] = static_cast<int>(std::lround(peak * frac));
    }
    v[mid] = static_cast<int>(std::lround(peak));
    return v;
}

}  // namespace detail

/// Deterministic synthetic trace calibrated to the measured workload shape:
/// Zipf-ranked peak audiences, heavy-tailed session durations, diurnal
/// arrivals, habitual popular schedules, and keyed crowdsourced events.
inline std::vector<StreamRecord> synth_trace(const GeneratorParams& gp) {
    if (gp.broadcasters <= 0 || gp.days <= 0 || gp.slots_per_day <= 0)
        throw ConfigError("generator params: counts must be positive");
    if (gp.source_bitrates.size() != gp.bitrate_weights.size() || gp.source_bitrates.empty())
        throw ConfigError("generator params: bitrate list and weights must match");

    Rng rng(gp.seed);
    const int n = gp.broadcasters;
    const int total_slots = gp.days * gp.slots_per_day;
    const double scale = n / gp.reference_population;

    // rank-based peak-viewer capacity
    const double c0 = gp.popular_cutoff_viewers *
                      std::pow(gp.target_popular_fraction * n, gp.zipf_exponent);
    std::vector<double> capacity(n);
    std::vector<int> bitrate(n);
    std::vector<char> partner(n, 0);
    const int n_partners = static_cast<int>(gp.partner_fraction * n);
    for (int i = 0; i < n; ++i) {
        capacity[i] = c0 / std::pow(double(i + 1), gp.zipf_exponent) *
                      std::exp(rng.normal(0.0, gp.peak_noise_sigma));
        bitrate[i] = gp.source_bitrates[detail::draw_weighted(rng, gp.bitrate_weights)];
        partner[i] = i < n_partners ? 1 : 0;
    }
    std::vector<int> popular, unpopular;
    for (int i = 0; i < n; ++i)
        (capacity[i] >= gp.popular_cutoff_viewers ? popular : unpopular).push_back(i);
    if (unpopular.empty())
        throw ConfigError("generator calibration impossible: no unpopular broadcasters");

    const double mu_u = std::log(gp.unpopular_duration_median_min);
    const double sg_u = detail::lognormal_sigma(gp.unpopular_duration_median_min,
                                                gp.unpopular_duration_q80_min);
    const double mu_p = std::log(gp.popular_duration_median_min);
    const double sg_p = detail::lognormal_sigma(gp.popular_duration_median_min,
                                                gp.popular_duration_q80_min);
    const double slot_min = 5.0;  // durations are drawn in minutes

    // habitual start slot per popular broadcaster, biased to the diurnal peak
    std::map<int, int> preferred;
    std::vector<std::vector<int>> pref_bucket(gp.slots_per_day);
    {
        std::vector<double> w(gp.slots_per_day);
        for (int s = 0; s < gp.slots_per_day; ++s)
            w[s] = gp.popular_arrivals.rate(s, gp.slots_per_day);
        for (int b : popular) {
            const int s = detail::draw_weighted(rng, w);
            preferred[b] = s;
            pref_bucket[s].push_back(b);
        }
    }

    std::vector<StreamRecord> records;
    std::vector<int> live_until(n, -1);
    std::vector<int> last_streamed_day(n, -1);

    auto draw_duration = [&](bool is_popular) {
        const double minutes =
            is_popular ? rng.lognormal(mu_p, sg_p) : rng.lognormal(mu_u, sg_u);
        return std::max(1, static_cast<int>(std::lround(minutes / slot_min)));
    };
    auto start_session = [&](int b, int t, int duration, const std::string& key,
                             bool is_popular) {
        const int dur = std::min(duration, total_slots - t);
        if (dur < 1) return;
        const double peak =
            capacity[b] * rng.uniform(gp.session_peak_min_frac, 1.0);
        StreamRecord r;
        {
            std::ostringstream id;
            id << "b" << std::setw(6) << std::setfill('0') << (b + 1);
            r.broadcaster_id = id.str();
        }
        r.start_slot = t;
        r.duration_slots = dur;
        r.event_key = key;
        r.viewers = detail::viewer_series(peak, dur);
        r.bitrate_kbps = bitrate[b];
        r.partner = partner[b] != 0;
        records.push_back(std::move(r));
        live_until[b] = t + dur - 1;
        last_streamed_day[b] = t / gp.slots_per_day;
        (void)is_popular;
    };

    // events, scheduled per day with a concurrency cap
    struct EventPlan {
        int start = 0;
        int end = 0;  // exclusive
        std::vector<int> members;
        std::string key;
    };
    int event_serial = 0;
    std::vector<EventPlan> plans;
    std::vector<double> diurnal_weights(gp.slots_per_day);
    for (int s = 0; s < gp.slots_per_day; ++s)
        diurnal_weights[s] = gp.popular_arrivals.rate(s, gp.slots_per_day);
    for (int day = 0; day < gp.days; ++day) {
        const int want = rng.poisson(gp.events_per_day_mean);
        std::vector<EventPlan> today;
        for (int k = 0; k < want; ++k) {
            EventPlan ep;
            const int slot_of_day = detail::draw_weighted(rng, diurnal_weights);
            ep.start = day * gp.slots_per_day + slot_of_day;
            ep.end = std::min(total_slots, ep.start + draw_duration(true));
            const int size = gp.event_min_size +
                             static_cast<int>(rng.next_below(
                                 std::uint64_t(gp.event_max_size - gp.event_min_size + 1)));
            for (int m = 0; m < size; ++m) {
                const bool from_popular =
                    !popular.empty() && rng.next_double() < gp.event_member_popular_prob;
                const auto& pool = from_popular ? popular : unpopular;
                ep.members.push_back(pool[rng.next_below(pool.size())]);
            }
            std::sort(ep.members.begin(), ep.members.end());
            ep.members.erase(std::unique(ep.members.begin(), ep.members.end()),
                             ep.members.end());
            int overlapping = 0;
            for (const auto& other : today)
                if (other.start < ep.end && ep.start < other.end) ++overlapping;
            if (overlapping + 1 > gp.max_concurrent_events) continue;  // keep the daily cap
            ep.key = "evt-" + std::to_string(++event_serial);
            today.push_back(ep);
        }
        plans.insert(plans.end(), today.begin(), today.end());
    }
    std::sort(plans.begin(), plans.end(),
              [](const EventPlan& a, const EventPlan& b) { return a.start < b.start; });

    std::size_t next_plan = 0;
    for (int t = 0; t < total_slots; ++t) {
        const int day = t / gp.slots_per_day;
        const int slot_of_day = t % gp.slots_per_day;

        // event sessions start together at the event's opening slot
        while (next_plan < plans.size() && plans[next_plan].start == t) {
            const auto& ep = plans[next_plan];
            for (int b : ep.members) {
                if (live_until[b] >= t) continue;
                start_session(b, t, std::max(1, ep.end - ep.start), ep.key,
                              capacity[b] >= gp.popular_cutoff_viewers);
            }
            ++next_plan;
        }

        // popular arrivals: rate-limited, habitual start times
        const int k_pop = rng.poisson(gp.popular_arrivals.rate(slot_of_day, gp.slots_per_day) *
                                      scale);
        int found = 0;
        for (int off = 0; off <= gp.popular_window_slots && found < k_pop; ++off) {
            for (const int sign : {+1, -1}) {
                if (found >= k_pop) break;
                if (sign < 0 && off == 0) continue;
                const int s = ((slot_of_day + sign * off) % gp.slots_per_day +
                               gp.slots_per_day) % gp.slots_per_day;
                for (int b : pref_bucket[s]) {
                    if (found >= k_pop) break;
                    if (live_until[b] >= t || last_streamed_day[b] == day) continue;
                    start_session(b, t, draw_duration(true), "", true);
                    ++found;
                }
            }
        }

        // unpopular arrivals: memoryless
        const int k_unpop = rng.poisson(
            gp.unpopular_arrivals.rate(slot_of_day, gp.slots_per_day) * scale);
        for (int k = 0; k < k_unpop; ++k) {
            const int b = unpopular[rng.next_below(unpopular.size())];
            if (live_until[b] >= t) continue;
            start_session(b, t, draw_duration(false), "", false);
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct ZipfFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

/// OLS on log(peak) vs log(rank). Peaks below `floor` are excluded: integer
/// viewer counts flatten into an uninformative plateau there.
inline ZipfFit zipf_loglog_fit(std::vector<double> peaks, double floor = 2.0) {
    std::sort(peaks.begin(), peaks.end(), std::greater<>());
    ZipfFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int m = 0;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (peaks[i] < floor) break;
        const double x = std::log(static_cast<double>(i + 1));
        const double y = std::log(peaks[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
        ++m;
    }
    fit.points = m;
    if (m < 3) return fit;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss_res = 0.0;
    int i = 0;
    for (double p : peaks) {
        if (p < floor) break;
        const double x = std::log(static_cast<double>(++i));
        const double e = std::log(p) - (fit.intercept + fit.slope * x);
        ss_res += e * e;
    }
    const double ss_tot = syy - sy * sy / m;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

struct CalibrationSummary {
    int sessions = 0;
    int distinct_streamers = 0;
    ZipfFit zipf;
    double frac_peak_under_8 = 0.0;
    double top3pct_peak_share = 0.0;
    double unpopular_frac_under_83min = 0.0;
    int max_concurrent_events = 0;
};

inline CalibrationSummary calibrate(const std::vector<StreamRecord>& records,
                                    double popular_cutoff = 8.0,
                                    double slot_minutes = 5.0) {
    CalibrationSummary cs;
    cs.sessions = static_cast<int>(records.size());

    std::map<std::string, int> peak;
    for (const auto& r : records) {
        int p = 0;
        for (int v : r.viewers) p = std::max(p, v);
        auto [it, fresh] = peak.emplace(r.broadcaster_id, p);
        if (!fresh) it->second = std::max(it->second, p);
    }
    cs.distinct_streamers = static_cast<int>(peak.size());
    if (peak.empty()) return cs;

    std::vector<double> peaks;
    peaks.reserve(peak.size());
    double total = 0.0;
    int under8 = 0;
    for (const auto& [id, p] : peak) {
        peaks.push_back(p);
        total += p;
        if (p < popular_cutoff) ++under8;
    }
    cs.frac_peak_under_8 = double(under8) / peaks.size();
    cs.zipf = zipf_loglog_fit(peaks);

    std::sort(peaks.begin(), peaks.end(), std::greater<>());
    const int top = std::max(1, static_cast<int>(0.03 * peaks.size()));
    double top_sum = 0.0;
    for (int i = 0; i < top; ++i) top_sum += peaks[i];
    cs.top3pct_peak_share = total > 0.0 ? top_sum / total : 0.0;

    int unpop_sessions = 0, unpop_short = 0;
    for (const auto& r : records) {
        const auto it = peak.find(r.broadcaster_id);
        if (it->second >= popular_cutoff) continue;
        ++unpop_sessions;
        if (r.duration_slots * slot_minutes < 83.0) ++unpop_short;
    }
    cs.unpopular_frac_under_83min =
        unpop_sessions > 0 ? double(unpop_short) / unpop_sessions : 0.0;

    // concurrent keyed events per slot
    std::map<int, std::map<std::string, int>> events_at;  // slot -> key counts (sparse scan)
    for (const auto& r : records) {
        if (r.event_key.empty()) continue;
        for (int k = 0; k < r.duration_slots; ++k) events_at[r.start_slot + k][r.event_key] = 1;
    }
    for (const auto& [slot, keys] : events_at)
        cs.max_concurrent_events =
            std::max(cs.max_concurrent_events, static_cast<int>(keys.size()));
    return cs;
}

}  // namespace hycls
