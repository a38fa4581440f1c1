#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hycls/engine.hpp"

namespace hycls {

/// Parametric transcode-latency grid: seconds grow affinely with both
/// bitrates, scaled per load band. Matches measurements well enough for a
/// default and is monotone by construction.
inline TranscodeTable make_transcode_table(std::vector<double> grid_kbps,
                                           std::vector<double> band_base_s,
                                           double in_coef_per_mbps = 0.25,
                                           double out_coef_per_mbps = 0.35) {
    TranscodeTable t;
    t.grid_kbps = std::move(grid_kbps);
    const std::size_t n = t.grid_kbps.size();
    for (double base : band_base_s) {
        std::vector<double> m(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                m[i * n + j] = base * (0.8 + in_coef_per_mbps * t.grid_kbps[i] / 1000.0 +
                                       out_coef_per_mbps * t.grid_kbps[j] / 1000.0);
            }
        }
        t.bands.push_back(std::move(m));
    }
    t.validate();
    return t;
}

inline std::map<std::string, double> make_delivery_latency(double source_s, double step_s) {
    return {{"source", source_s},
            {"720p", source_s - step_s},
            {"480p", source_s - 2.0 * step_s},
            {"360p", source_s - 2.5 * step_s},
            {"240p", source_s - 3.0 * step_s}};
}

/// The shipped scenario: one dedicated datacenter plus three cloud areas with
/// m3.large-style instances (700 Mbps, 8 compute-units) at staggered prices.
/// The dedicated site has the best latency and is free but small, so peak
/// traffic has to spill into leased instances.
inline SimConfig default_sim_config() {
    SimConfig cfg;
    cfg.gain = {1.0, 0.011};
    cfg.bandwidth_budget = 10.0;
    cfg.compute_budget = 10.0;

    Region ded;
    ded.id = "ded-main";
    ded.kind = RegionKind::Dedicated;
    ded.bandwidth_cap_mbps = 320.0;
    ded.compute_cap = 30.0;
    ded.instance_bandwidth_mbps = 700.0;
    ded.unit_compute = 8.0;
    ded.price_bandwidth = 0.004;  // internal amortized price, used only for ordering
    ded.price_compute = 0.004;
    ded.delivery_latency_s = make_delivery_latency(9.5, 1.0);

    auto cloud = [](const std::string& id, double price, double delivery) {
        Region r;
        r.id = id;
        r.kind = RegionKind::PublicCloud;
        r.bandwidth_cap_mbps = 3000.0;
        r.compute_cap = 280.0;
        r.instance_bandwidth_mbps = 700.0;
        r.unit_compute = 8.0;
        r.price_bandwidth = price;
        r.price_compute = price;
        r.delivery_latency_s = make_delivery_latency(delivery, 1.0);
        return r;
    };
    cfg.regions = {ded, cloud("cloud-east", 0.0111, 10.0), cloud("cloud-west", 0.0140, 10.3),
                   cloud("cloud-eu", 0.0167, 10.6)};
    cfg.dedicated_region = 0;

    LinkSynthesis synth;
    synth.seed = 7;
    synth.base_s = {1.0, 1.8, 2.2, 2.8};
    synth.jitter_s = {0.8, 1.0, 1.0, 1.0};
    cfg.latency.synth = synth;
    cfg.latency.transcode =
        make_transcode_table({500, 800, 1300, 2500, 3500, 6000}, {2.0, 2.6, 3.4});
    return cfg;
}

/// Generator shape for the bare `simulate` run: three days at desk scale with
/// denser arrivals than the full-population reference so a small roster still
/// produces meaningful load.
inline GeneratorParams default_sim_generator() {
    GeneratorParams gp;
    gp.broadcasters = 2500;
    gp.days = 3;
    gp.reference_population = 150000.0;
    gp.seed = 1;
    return gp;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization — every field optional, defaults fill the gaps
// ---------------------------------------------------------------------------

namespace cfgjson {

using nlohmann::json;

inline RegionKind region_kind_from(const std::string& s) {
    if (s == "dedicated") return RegionKind::Dedicated;
    if (s == "public-cloud" || s == "cloud") return RegionKind::PublicCloud;
    throw ConfigError("unknown region kind \"" + s + "\"");
}

inline json region_to_json(const Region& r) {
    return json{{"id", r.id},
                {"kind", r.kind == RegionKind::Dedicated ? "dedicated" : "public-cloud"},
                {"bandwidth_cap_mbps", r.bandwidth_cap_mbps},
                {"compute_cap", r.compute_cap},
                {"instance_bandwidth_mbps", r.instance_bandwidth_mbps},
                {"unit_compute", r.unit_compute},
                {"price_bandwidth", r.price_bandwidth},
                {"price_compute", r.price_compute},
                {"delivery_latency_s", r.delivery_latency_s}};
}

inline Region region_from_json(const json& j) {
    Region r;
    r.id = j.at("id").get<std::string>();
    r.kind = region_kind_from(j.at("kind").get<std::string>());
    r.bandwidth_cap_mbps = j.at("bandwidth_cap_mbps").get<double>();
    r.compute_cap = j.at("compute_cap").get<double>();
    r.instance_bandwidth_mbps = j.at("instance_bandwidth_mbps").get<double>();
    r.unit_compute = j.at("unit_compute").get<double>();
    r.price_bandwidth = j.value("price_bandwidth", 0.0);
    r.price_compute = j.value("price_compute", 0.0);
    r.delivery_latency_s =
        j.at("delivery_latency_s").get<std::map<std::string, double>>();
    return r;
}

inline void diurnal_from_json(const json& j, DiurnalProfile& p) {
    p.base = j.value("base", p.base);
    p.peak_extra = j.value("peak_extra", p.peak_extra);
    p.peak_center = j.value("peak_center", p.peak_center);
    p.peak_width = j.value("peak_width", p.peak_width);
}

inline json diurnal_to_json(const DiurnalProfile& p) {
    return json{{"base", p.base},
                {"peak_extra", p.peak_extra},
                {"peak_center", p.peak_center},
                {"peak_width", p.peak_width}};
}

inline GeneratorParams generator_from_json(const json& j) {
    GeneratorParams gp;
    gp.broadcasters = j.value("broadcasters", gp.broadcasters);
    gp.days = j.value("days", gp.days);
    gp.slots_per_day = j.value("slots_per_day", gp.slots_per_day);
    gp.seed = j.value("seed", gp.seed);
    gp.zipf_exponent = j.value("zipf_exponent", gp.zipf_exponent);
    gp.peak_noise_sigma = j.value("peak_noise_sigma", gp.peak_noise_sigma);
    gp.popular_cutoff_viewers = j.value("popular_cutoff_viewers", gp.popular_cutoff_viewers);
    gp.target_popular_fraction =
        j.value("target_popular_fraction", gp.target_popular_fraction);
    gp.unpopular_duration_median_min =
        j.value("unpopular_duration_median_min", gp.unpopular_duration_median_min);
    gp.unpopular_duration_q80_min =
        j.value("unpopular_duration_q80_min", gp.unpopular_duration_q80_min);
    gp.popular_duration_median_min =
        j.value("popular_duration_median_min", gp.popular_duration_median_min);
    gp.popular_duration_q80_min =
        j.value("popular_duration_q80_min", gp.popular_duration_q80_min);
    gp.reference_population = j.value("reference_population", gp.reference_population);
    if (j.contains("unpopular_arrivals")) diurnal_from_json(j["unpopular_arrivals"], gp.unpopular_arrivals);
    if (j.contains("popular_arrivals")) diurnal_from_json(j["popular_arrivals"], gp.popular_arrivals);
    gp.popular_window_slots = j.value("popular_window_slots", gp.popular_window_slots);
    gp.events_per_day_mean = j.value("events_per_day_mean", gp.events_per_day_mean);
    gp.max_concurrent_events = j.value("max_concurrent_events", gp.max_concurrent_events);
    gp.event_min_size = j.value("event_min_size", gp.event_min_size);
    gp.event_max_size = j.value("event_max_size", gp.event_max_size);
    gp.event_member_popular_prob =
        j.value("event_member_popular_prob", gp.event_member_popular_prob);
    gp.source_bitrates = j.value("source_bitrates", gp.source_bitrates);
    gp.bitrate_weights = j.value("bitrate_weights", gp.bitrate_weights);
    gp.partner_fraction = j.value("partner_fraction", gp.partner_fraction);
    gp.session_peak_min_frac = j.value("session_peak_min_frac", gp.session_peak_min_frac);
    return gp;
}

inline json generator_to_json(const GeneratorParams& gp) {
    return json{{"broadcasters", gp.broadcasters},
                {"days", gp.days},
                {"slots_per_day", gp.slots_per_day},
                {"seed", gp.seed},
                {"zipf_exponent", gp.zipf_exponent},
                {"peak_noise_sigma", gp.peak_noise_sigma},
                {"popular_cutoff_viewers", gp.popular_cutoff_viewers},
                {"target_popular_fraction", gp.target_popular_fraction},
                {"unpopular_duration_median_min", gp.unpopular_duration_median_min},
                {"unpopular_duration_q80_min", gp.unpopular_duration_q80_min},
                {"popular_duration_median_min", gp.popular_duration_median_min},
                {"popular_duration_q80_min", gp.popular_duration_q80_min},
                {"reference_population", gp.reference_population},
                {"unpopular_arrivals", diurnal_to_json(gp.unpopular_arrivals)},
                {"popular_arrivals", diurnal_to_json(gp.popular_arrivals)},
                {"popular_window_slots", gp.popular_window_slots},
                {"events_per_day_mean", gp.events_per_day_mean},
                {"max_concurrent_events", gp.max_concurrent_events},
                {"event_min_size", gp.event_min_size},
                {"event_max_size", gp.event_max_size},
                {"event_member_popular_prob", gp.event_member_popular_prob},
                {"source_bitrates", gp.source_bitrates},
                {"bitrate_weights", gp.bitrate_weights},
                {"partner_fraction", gp.partner_fraction},
                {"session_peak_min_frac", gp.session_peak_min_frac}};
}

inline ProfileParams profile_from_json(const json& j) {
    ProfileParams pp;
    if (j.contains("transcode_ladder")) {
        pp.transcode_ladder.clear();
        for (const auto& v : j["transcode_ladder"]) {
            pp.transcode_ladder.push_back(
                {v.at("label").get<std::string>(), v.at("bitrate_kbps").get<double>()});
        }
    }
    if (j.contains("version_shares"))
        pp.version_shares = j["version_shares"].get<std::map<std::string, double>>();
    pp.compute_base = j.value("compute_base", pp.compute_base);
    pp.compute_per_mbps = j.value("compute_per_mbps", pp.compute_per_mbps);
    return pp;
}

inline json profile_to_json(const ProfileParams& pp) {
    json ladder = json::array();
    for (const auto& v : pp.transcode_ladder)
        ladder.push_back({{"label", v.label}, {"bitrate_kbps", v.bitrate_kbps}});
    return json{{"transcode_ladder", ladder},
                {"version_shares", pp.version_shares},
                {"compute_base", pp.compute_base},
                {"compute_per_mbps", pp.compute_per_mbps}};
}

}  // namespace cfgjson

struct FullConfig {
    SimConfig sim = default_sim_config();
    GeneratorParams sim_generator = default_sim_generator();
};

inline FullConfig config_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    FullConfig fc;
    SimConfig& cfg = fc.sim;
    if (j.contains("gain")) {
        cfg.gain.alpha = j["gain"].value("alpha", cfg.gain.alpha);
        cfg.gain.beta = j["gain"].value("beta", cfg.gain.beta);
    }
    cfg.slot_minutes = j.value("slot_minutes", cfg.slot_minutes);
    cfg.slots_per_day = j.value("slots_per_day", cfg.slots_per_day);
    cfg.si_history_days = j.value("si_history_days", cfg.si_history_days);
    cfg.initial_threshold = j.value("initial_threshold", cfg.initial_threshold);
    cfg.offload_trigger = j.value("offload_trigger", cfg.offload_trigger);
    if (j.contains("si_normalization")) {
        const auto s = j["si_normalization"].get<std::string>();
        if (s == "paper-verbatim") cfg.si_normalization = SiNormalization::PaperVerbatim;
        else if (s == "adjacent-pairs") cfg.si_normalization = SiNormalization::AdjacentPairs;
        else throw ConfigError("unknown si_normalization \"" + s + "\"");
    }
    if (j.contains("si_zero_denominator")) {
        const auto s = j["si_zero_denominator"].get<std::string>();
        if (s == "per-term") cfg.si_zero_policy = SiZeroDenomPolicy::PerTermZero;
        else if (s == "whole-index") cfg.si_zero_policy = SiZeroDenomPolicy::WholeIndexZero;
        else throw ConfigError("unknown si_zero_denominator \"" + s + "\"");
    }
    if (j.contains("budgets")) {
        cfg.bandwidth_budget = j["budgets"].value("bandwidth", cfg.bandwidth_budget);
        cfg.compute_budget = j["budgets"].value("compute", cfg.compute_budget);
    }
    cfg.strict_budget = j.value("strict_budget", cfg.strict_budget);
    if (j.contains("band_boundaries")) {
        const auto b = j["band_boundaries"].get<std::vector<double>>();
        if (b.size() != 2) throw ConfigError("band_boundaries must hold two values");
        cfg.band_low_hi = b[0];
        cfg.band_med_hi = b[1];
    }
    cfg.migration_latency_penalty_s =
        j.value("migration_latency_penalty_s", cfg.migration_latency_penalty_s);
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("regions")) {
        cfg.regions.clear();
        for (const auto& r : j["regions"]) cfg.regions.push_back(cfgjson::region_from_json(r));
        // synthesized latencies are tied to the region list; rebuild below
        cfg.latency.synth.reset();
    }
    if (j.contains("dedicated_region")) {
        const auto id = j["dedicated_region"].get<std::string>();
        int idx = -1;
        for (std::size_t r = 0; r < cfg.regions.size(); ++r)
            if (cfg.regions[r].id == id) idx = static_cast<int>(r);
        if (idx < 0) throw ConfigError("dedicated_region \"" + id + "\" not in region list");
        cfg.dedicated_region = idx;
    }
    if (j.contains("latency")) {
        const auto& lj = j["latency"];
        if (lj.contains("synth")) {
            LinkSynthesis synth;
            synth.seed = lj["synth"].value("seed", std::uint64_t(7));
            synth.base_s = lj["synth"].at("base_s").get<std::vector<double>>();
            synth.jitter_s = lj["synth"].at("jitter_s").get<std::vector<double>>();
            if (synth.base_s.size() != cfg.regions.size() ||
                synth.jitter_s.size() != cfg.regions.size())
                throw ConfigError("latency.synth arrays must match the region count");
            cfg.latency.synth = synth;
        }
        if (lj.contains("link_overrides")) {
            for (const auto& e : lj["link_overrides"]) {
                cfg.latency.link_s[{e.at("broadcaster").get<int>(), e.at("region").get<int>()}] =
                    e.at("latency_s").get<double>();
            }
        }
        if (lj.contains("transcode")) {
            const auto& tj = lj["transcode"];
            if (tj.contains("bands")) {
                TranscodeTable t;
                t.grid_kbps = tj.at("grid_kbps").get<std::vector<double>>();
                for (const auto& b : tj.at("bands"))
                    t.bands.push_back(b.get<std::vector<double>>());
                t.validate();
                cfg.latency.transcode = std::move(t);
            } else {
                cfg.latency.transcode = make_transcode_table(
                    tj.at("grid_kbps").get<std::vector<double>>(),
                    tj.at("band_base_s").get<std::vector<double>>(),
                    tj.value("in_coef_per_mbps", 0.25), tj.value("out_coef_per_mbps", 0.35));
            }
        }
    } else if (!cfg.latency.synth) {
        throw ConfigError("custom regions need a latency section");
    }
    if (j.contains("profile")) cfg.profile = cfgjson::profile_from_json(j["profile"]);
    if (j.contains("generator")) fc.sim_generator = cfgjson::generator_from_json(j["generator"]);
    if (fc.sim_generator.slots_per_day != cfg.slots_per_day)
        fc.sim_generator.slots_per_day = cfg.slots_per_day;
    return fc;
}

inline nlohmann::json config_to_json(const FullConfig& fc) {
    using nlohmann::json;
    const SimConfig& cfg = fc.sim;
    json j;
    j["gain"] = {{"alpha", cfg.gain.alpha}, {"beta", cfg.gain.beta}};
    j["slot_minutes"] = cfg.slot_minutes;
    j["slots_per_day"] = cfg.slots_per_day;
    j["si_history_days"] = cfg.si_history_days;
    j["initial_threshold"] = cfg.initial_threshold;
    j["offload_trigger"] = cfg.offload_trigger;
    j["si_normalization"] = cfg.si_normalization == SiNormalization::PaperVerbatim
                                ? "paper-verbatim"
                                : "adjacent-pairs";
    j["si_zero_denominator"] =
        cfg.si_zero_policy == SiZeroDenomPolicy::PerTermZero ? "per-term" : "whole-index";
    j["budgets"] = {{"bandwidth", cfg.bandwidth_budget}, {"compute", cfg.compute_budget}};
    j["strict_budget"] = cfg.strict_budget;
    j["band_boundaries"] = {cfg.band_low_hi, cfg.band_med_hi};
    j["migration_latency_penalty_s"] = cfg.migration_latency_penalty_s;
    j["seed"] = cfg.seed;
    j["dedicated_region"] = cfg.regions[cfg.dedicated_region].id;
    j["regions"] = nlohmann::json::array();
    for (const auto& r : cfg.regions) j["regions"].push_back(cfgjson::region_to_json(r));
    if (cfg.latency.synth) {
        j["latency"]["synth"] = {{"seed", cfg.latency.synth->seed},
                                 {"base_s", cfg.latency.synth->base_s},
                                 {"jitter_s", cfg.latency.synth->jitter_s}};
    }
    j["latency"]["transcode"] = {{"grid_kbps", cfg.latency.transcode.grid_kbps},
                                 {"bands", cfg.latency.transcode.bands}};
    j["profile"] = cfgjson::profile_to_json(cfg.profile);
    j["generator"] = cfgjson::generator_to_json(fc.sim_generator);
    return j;
}

inline FullConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config field error in " + path + ": " + e.what());
    }
}

}  // namespace hycls
