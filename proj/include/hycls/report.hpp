#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hycls/engine.hpp"

namespace hycls {

namespace detail {

inline std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace detail

/// Per-slot CSV: slot, region-wise W and C, costs, objective, migrations,
/// violation count. Fixed formatting keeps reruns byte-identical.
inline void write_csv(const SimReport& report, const std::vector<Region>& regions,
                      std::ostream& out) {
    out << "slot";
    for (const auto& r : regions) out << ",W_" << r.id;
    for (const auto& r : regions) out << ",C_" << r.id;
    out << ",bw_cost,cpu_cost,objective_min,migrations,violations\n";
    for (const auto& s : report.slots) {
        out << s.slot;
        for (double v : s.bandwidth_by_region) out << ',' << detail::fmt(v, "%.4f");
        for (double v : s.compute_by_region) out << ',' << detail::fmt(v, "%.4f");
        out << ',' << detail::fmt(s.bandwidth_cost, "%.6f") << ','
            << detail::fmt(s.compute_cost, "%.6f") << ','
            << detail::fmt(s.objective_min, "%.6f") << ',' << s.migrations << ','
            << s.violations.size() << "\n";
    }
}

inline nlohmann::json summary_json(const SimReport& report) {
    nlohmann::json j;
    j["strategy"] = report.strategy;
    j["seed"] = report.seed;
    j["slots"] = report.slots.size();
    j["total_bandwidth_cost"] = report.total_bandwidth_cost;
    j["total_compute_cost"] = report.total_compute_cost;
    j["total_cost"] = report.total_cost;
    if (report.normalized_cost)
        j["normalized_cost"] = *report.normalized_cost;
    else
        j["normalized_cost"] = nullptr;
    j["migrations"] = {{"total", report.total_migrations},
                       {"continuing_total", report.total_continuing},
                       {"avg_fraction", report.avg_migration_fraction},
                       {"peak_fraction", report.peak_migration_fraction},
                       {"daily_fraction", report.daily_migration_fraction}};
    j["overflow_total"] = report.overflow_total;
    j["offload_override_total"] = report.offload_override_total;

    nlohmann::json items = nlohmann::json::array();
    long listed = 0;
    for (const auto& s : report.slots) {
        for (const auto& v : s.violations) {
            if (listed >= 1000) break;  // keep summaries bounded
            items.push_back({{"slot", v.slot},
                             {"region", v.region_id},
                             {"kind", v.kind},
                             {"amount", v.amount}});
            ++listed;
        }
    }
    j["violations"] = {{"count", report.violation_count}, {"items", items}};

    double obj_min = std::numeric_limits<double>::infinity();
    double obj_sum = 0.0;
    long obj_n = 0;
    for (const auto& s : report.slots) {
        if (s.event_min.empty()) continue;
        obj_min = std::min(obj_min, s.objective_min);
        obj_sum += s.objective_min;
        ++obj_n;
    }
    j["objective"] = {{"min", obj_n > 0 ? obj_min : 0.0},
                      {"mean_slot_min", obj_n > 0 ? obj_sum / obj_n : 0.0}};
    return j;
}

inline void write_report_files(const SimReport& report, const std::vector<Region>& regions,
                               const std::string& csv_path, const std::string& json_path) {
    {
        std::ofstream csv(csv_path);
        if (!csv) throw ConfigError("cannot write " + csv_path);
        write_csv(report, regions, csv);
    }
    {
        std::ofstream js(json_path);
        if (!js) throw ConfigError("cannot write " + json_path);
        js << summary_json(report).dump(2) << "\n";
    }
}

}  // namespace hycls
