// hycls — trace generation, validation, and placement simulation CLI.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hycls/config.hpp"
#include "hycls/report.hpp"
#include "hycls/trace.hpp"

namespace fs = std::filesystem;
using namespace hycls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

FullConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return FullConfig{};
    return load_config(config_path);
}

void print_calibration(const CalibrationSummary& cs) {
    std::printf("sessions: %d  distinct streamers: %d\n", cs.sessions, cs.distinct_streamers);
    std::printf("zipf log-log fit: R2=%.4f slope=%.3f (%d points)\n", cs.zipf.r_squared,
                cs.zipf.slope, cs.zipf.points);
    std::printf("peak<8 viewers: %.1f%%  top-3%% peak share: %.1f%%  unpopular<83min: %.1f%%\n",
                100.0 * cs.frac_peak_under_8, 100.0 * cs.top3pct_peak_share,
                100.0 * cs.unpopular_frac_under_83min);
    std::printf("max concurrent events: %d\n", cs.max_concurrent_events);
    if (cs.zipf.r_squared < 0.95)
        std::printf("WARN: zipf fit below 0.95\n");
    if (std::abs(cs.frac_peak_under_8 - 0.90) > 0.03)
        std::printf("WARN: peak<8 share off the 90%% +- 3%% window\n");
    if (std::abs(cs.top3pct_peak_share - 0.80) > 0.05)
        std::printf("WARN: top-3%% share off the 80%% +- 5%% window\n");
    if (std::abs(cs.unpopular_frac_under_83min - 0.80) > 0.05)
        std::printf("WARN: unpopular duration quantile off the 80%% +- 5%% window\n");
}

int cmd_gen_trace(const std::string& config_path, const std::string& out_path,
                  std::optional<std::uint64_t> seed) {
    GeneratorParams gp;
    if (!config_path.empty()) gp = load_config(config_path).sim_generator;
    if (seed) gp.seed = *seed;
    const auto records = synth_trace(gp);
    save_trace(records, out_path);
    std::printf("wrote %zu records to %s (seed %llu)\n", records.size(), out_path.c_str(),
                static_cast<unsigned long long>(gp.seed));
    print_calibration(calibrate(records, gp.popular_cutoff_viewers));
    return kExitOk;
}

int cmd_validate(const std::string& trace_path) {
    const TraceLoadResult res = load_trace(trace_path, /*malformed_abort_fraction=*/1.0);
    for (const auto& d : res.diagnostics)
        std::printf("line %d: %s\n", d.line, d.message.c_str());
    if (!res.clean()) {
        std::printf("INVALID: %zu problem(s) in %d record line(s)\n", res.diagnostics.size(),
                    res.total_lines);
        return kExitValidation;
    }
    std::printf("OK: %zu records, %d lines\n", res.records.size(), res.total_lines);
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& trace_path,
                 const std::string& out_dir, std::optional<std::uint64_t> seed,
                 const std::string& strategies_csv, bool strict_budget) {
    FullConfig fc = load_or_default(config_path);
    if (seed) {
        fc.sim.seed = *seed;
        fc.sim_generator.seed = *seed;
    }
    if (strict_budget) fc.sim.strict_budget = true;

    std::vector<Strategy> strategies;
    {
        std::stringstream ss(strategies_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            const auto s = strategy_from_name(tok);
            if (!s) {
                std::fprintf(stderr, "unknown strategy \"%s\" (use hycls, lb-v, lb-c)\n",
                             tok.c_str());
                return kExitUsage;
            }
            strategies.push_back(*s);
        }
    }
    if (strategies.empty()) {
        std::fprintf(stderr, "no strategies requested\n");
        return kExitUsage;
    }

    std::vector<StreamRecord> records;
    if (!trace_path.empty()) {
        TraceLoadResult res = load_trace(trace_path);
        if (res.aborted) {
            for (const auto& d : res.diagnostics)
                std::fprintf(stderr, "line %d: %s\n", d.line, d.message.c_str());
            std::fprintf(stderr, "trace %s rejected\n", trace_path.c_str());
            return kExitValidation;
        }
        if (!res.diagnostics.empty()) {
            std::fprintf(stderr, "note: skipped %zu malformed line(s)\n",
                         res.diagnostics.size());
        }
        records = std::move(res.records);
    } else {
        records = synth_trace(fc.sim_generator);
    }

    fs::create_directories(out_dir);
    if (trace_path.empty()) save_trace(records, (fs::path(out_dir) / "trace.jsonl").string());

    TraceData trace = derive_profiles(std::move(records), fc.sim.slots_per_day, fc.sim.profile);
    std::printf("trace: %zu records, %zu broadcasters, %d slots (%d days)\n",
                trace.records.size(), trace.roster.size(), trace.total_slots, trace.days);

    std::vector<SimReport> reports;
    bool infeasible = false;
    for (Strategy s : strategies) {
        SimConfig cfg = fc.sim;
        cfg.strategy = s;
        try {
            reports.push_back(run(cfg, trace));
        } catch (const InfeasibleError& e) {
            std::fprintf(stderr, "strategy %s infeasible: %s\n", strategy_name(s), e.what());
            infeasible = true;
            break;
        }
    }

    std::optional<double> lbc_total;
    for (const auto& r : reports)
        if (r.strategy == strategy_name(Strategy::LbC)) lbc_total = r.total_cost;
    for (auto& r : reports) {
        if (lbc_total && *lbc_total > 0.0) r.normalized_cost = r.total_cost / *lbc_total;
        write_report_files(r, fc.sim.regions, (fs::path(out_dir) / (r.strategy + ".csv")).string(),
                           (fs::path(out_dir) / (r.strategy + ".summary.json")).string());
    }

    if (reports.size() > 1) {
        nlohmann::json cmp = nlohmann::json::array();
        std::printf("%-8s %14s %14s\n", "strategy", "total_cost", "vs_lb-c");
        for (const auto& r : reports) {
            if (r.normalized_cost)
                std::printf("%-8s %14.6f %14.3f\n", r.strategy.c_str(), r.total_cost,
                            *r.normalized_cost);
            else
                std::printf("%-8s %14.6f %14s\n", r.strategy.c_str(), r.total_cost, "-");
            nlohmann::json row = {{"strategy", r.strategy}, {"total_cost", r.total_cost}};
            if (r.normalized_cost) row["normalized_cost"] = *r.normalized_cost;
            cmp.push_back(row);
        }
        std::ofstream cj(fs::path(out_dir) / "comparison.json");
        cj << cmp.dump(2) << "\n";
    }
    return infeasible ? kExitValidation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HyCLS hybrid-cloud crowdsourced live-streaming placement simulator"};
    app.require_subcommand(1);

    std::string config_path, trace_path, out_path = "out";
    std::string strategies = "hycls,lb-v,lb-c";
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    bool strict_budget = false;

    auto* gen = app.add_subcommand("gen-trace", "synthesize a calibrated JSONL trace");
    gen->add_option("--config", config_path, "config file with a generator section");
    std::string gen_out = "trace.jsonl";
    gen->add_option("--out", gen_out, "output trace path")->required();
    gen->add_option("--seed", seed_value, "generator seed")->each([&](const std::string&) {
        seed_given = true;
    });

    auto* sim = app.add_subcommand("simulate", "run placement strategies over a trace");
    sim->add_option("--config", config_path, "simulation config (defaults built in)");
    sim->add_option("--trace", trace_path, "JSONL trace (synthesized when omitted)");
    sim->add_option("--out", out_path, "output directory");
    sim->add_option("--seed", seed_value, "seed override")->each([&](const std::string&) {
        seed_given = true;
    });
    sim->add_option("--strategies", strategies, "comma list: hycls,lb-v,lb-c");
    sim->add_flag("--strict-budget", strict_budget, "enforce budget caps during assignment");

    auto* val = app.add_subcommand("validate", "check a JSONL trace file");
    val->add_option("--trace", trace_path, "trace to validate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::optional<std::uint64_t> seed =
        seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    try {
        if (gen->parsed()) return cmd_gen_trace(config_path, gen_out, seed);
        if (val->parsed()) return cmd_validate(trace_path);
        return cmd_simulate(config_path, trace_path, out_path, seed, strategies, strict_budget);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fatal: %s\n", e.what());
        return kExitValidation;
    }
}
