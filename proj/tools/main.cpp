#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hitstats/billiards.hpp"
#include "hitstats/bounds.hpp"
#include "hitstats/harness.hpp"
#include "hitstats/systems.hpp"

// hitstats CLI: simulate | hit-stats | rates | sweep | fit | selftest.
// Exit codes: 0 success, 1 validation error, 2 selftest failure.

namespace {

using hitstats::ExperimentConfig;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig load_config(const std::string& path, uint64_t* seed_override) {
    ExperimentConfig cfg = ExperimentConfig::from_json_text(read_file(path));
    if (seed_override) cfg.master_seed = *seed_override;
    cfg.validate();
    return cfg;
}

void dump_orbit_csv(const ExperimentConfig& cfg, std::size_t length, const std::string& path,
                    bool segments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    char buf[160];
    if (std::holds_alternative<hitstats::TableSpec>(cfg.system)) {
        const auto& table = std::get<hitstats::TableSpec>(cfg.system);
        hitstats::BilliardOrbit orbit(table, cfg.master_seed, cfg.burn_in);
        if (segments) {
            out << "flight,x0,y0,x1,y1\n";
            hitstats::CollisionState state = orbit.next();
            for (std::size_t i = 0; i < length; ++i) {
                hitstats::FlightSegment seg{};
                state = hitstats::billiard_step_traced(state, table, seg);
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, seg.x0, seg.y0,
                              seg.x1, seg.y1);
                out << buf;
            }
        } else {
            out << "step,s,phi\n";
            for (std::size_t i = 0; i < length; ++i) {
                const auto c = orbit.next();
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, c.s, c.phi);
                out << buf;
            }
        }
        return;
    }
    const auto& spec = std::get<hitstats::SystemSpec>(cfg.system);
    switch (spec.kind) {
        case hitstats::SystemKind::Doubling: {
            hitstats::DoublingOrbit o(cfg.master_seed, cfg.burn_in);
            out << "step,x\n";
            for (std::size_t i = 0; i < length; ++i) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, o.next().x);
                out << buf;
            }
            break;
        }
        case hitstats::SystemKind::Lsv: {
            hitstats::LsvOrbit o(spec.gamma, cfg.master_seed, cfg.burn_in);
            out << "step,x\n";
            for (std::size_t i = 0; i < length; ++i) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, o.next().x);
                out << buf;
            }
            break;
        }
        case hitstats::SystemKind::SmaleSolenoid: {
            hitstats::SmaleSolenoidOrbit o(spec.theta, cfg.master_seed, cfg.burn_in);
            out << "step,x,re,im\n";
            for (std::size_t i = 0; i < length; ++i) {
                const auto s = o.next();
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, s.x, s.z.real(),
                              s.z.imag());
                out << buf;
            }
            break;
        }
        case hitstats::SystemKind::IntermittentSolenoid: {
            hitstats::IntermittentSolenoidOrbit o(spec.gamma, spec.theta, cfg.master_seed,
                                                  cfg.burn_in);
            out << "step,x,re,im\n";
            for (std::size_t i = 0; i < length; ++i) {
                const auto s = o.next();
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, s.x, s.z.real(),
                              s.z.imag());
                out << buf;
            }
            break;
        }
        case hitstats::SystemKind::Henon: {
            hitstats::HenonOrbit o(spec.henon_a, spec.henon_b, spec.trap_half_width,
                                   cfg.master_seed, cfg.burn_in);
            out << "step,x,y\n";
            for (std::size_t i = 0; i < length; ++i) {
                const auto s = o.next();
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, s.x, s.y);
                out << buf;
            }
            break;
        }
    }
}

void print_rate_result(const std::string& label, const hitstats::RateResult& res) {
    std::printf("%s\n", label.c_str());
    if (res.feasible)
        std::printf("  a = %.12g   binding = %s\n", res.exponent_a, res.binding_term.c_str());
    else
        std::printf("  infeasible\n");
    if (!res.branches.empty()) {
        std::printf("  %-26s %12s\n", "branch", "value");
        for (const auto& b : res.branches)
            std::printf("  %-26s %12.6g%s\n", b.name.c_str(), b.value,
                        res.feasible && b.name == res.binding_term ? "  <- binding" : "");
    }
    std::printf("  %-26s %12s  %s\n", "constraint", "margin", "ok");
    for (const auto& c : res.constraint_report)
        std::printf("  %-26s %12.6g  %s\n", c.name.c_str(), c.margin,
                    c.satisfied ? "yes" : "NO");
}

json rate_result_to_json(const hitstats::RateResult& res) {
    json j;
    j["feasible"] = res.feasible;
    if (res.feasible) {
        j["a"] = res.exponent_a;
        j["binding"] = res.binding_term;
    }
    json branches = json::array();
    for (const auto& b : res.branches) branches.push_back({{"name", b.name}, {"value", b.value}});
    j["branches"] = branches;
    json cons = json::array();
    for (const auto& c : res.constraint_report)
        cons.push_back({{"name", c.name}, {"margin", c.margin}, {"satisfied", c.satisfied}});
    j["constraints"] = cons;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hitstats: Poisson hitting statistics for chaotic systems"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    uint64_t seed = 0;
    std::string out_dir = "out";
    std::size_t workers = 1;
    auto* seed_opt = app.add_option("--seed", seed, "override the master seed");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 256));

    // simulate
    auto* sim = app.add_subcommand("simulate", "dump an orbit / trajectory CSV");
    std::string sim_config;
    std::size_t sim_length = 1000;
    std::string sim_out = "orbit.csv";
    bool sim_segments = false;
    sim->add_option("--config", sim_config, "experiment config (JSON)")->required();
    sim->add_option("--length", sim_length, "number of states / flights");
    sim->add_option("--out", sim_out, "output CSV path");
    sim->add_flag("--segments", sim_segments, "billiards: dump (x,y) flight segments");

    // hit-stats
    auto* hs = app.add_subcommand("hit-stats", "run one experiment");
    std::string hs_config;
    hs->add_option("--config", hs_config, "experiment config (JSON)")->required();

    // rates
    auto* rates = app.add_subcommand("rates", "evaluate the rate exponents");
    double rt_xi = 2.0, rt_alpha = 3.0, rt_dim_h = 2.0, rt_dim_u = 1.0, rt_eps = 0.04;
    double rt_b = 0.0;
    bool rt_density = false, rt_optimize = false, rt_json = false;
    rates->add_option("--xi", rt_xi, "return-tail exponent, > 1");
    rates->add_option("--alpha", rt_alpha, "contraction exponent");
    rates->add_option("--dim-h", rt_dim_h, "Hausdorff dimension of the measure");
    rates->add_option("--dim-u", rt_dim_u, "unstable-leaf dimension");
    rates->add_option("--epsilon", rt_eps, "free small parameter");
    rates->add_option("--b", rt_b, "partition-regularity exponent (enables the partition variant)");
    rates->add_flag("--lebesgue-density", rt_density, "mu << Leb with bounded local density");
    rates->add_flag("--optimize", rt_optimize, "maximize over epsilon");
    rates->add_flag("--json", rt_json, "emit JSON instead of the aligned table");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a batch of experiments");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "JSON with an \"experiments\" array")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a decay exponent over an existing CSV");
    std::string fit_csv, fit_stat = "tv_counts";
    fit->add_option("--csv", fit_csv, "result CSV from hit-stats")->required();
    fit->add_option("--statistic", fit_stat, "column: tv_counts fidi_tv ks_exponential "
                                             "short_return_norm corona_ratio bound_total");

    // selftest
    app.add_subcommand("selftest", "run the built-in exact-arithmetic suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            ExperimentConfig cfg = load_config(sim_config, seed_opt->count() > 0 ? &seed : nullptr);
            dump_orbit_csv(cfg, sim_length, sim_out, sim_segments);
            std::printf("wrote %s\n", sim_out.c_str());
        } else if (hs->parsed()) {
            ExperimentConfig cfg = load_config(hs_config, seed_opt->count() > 0 ? &seed : nullptr);
            const auto result = hitstats::run_experiment(cfg, workers);
            const std::string path = hitstats::write_result(result, out_dir);
            std::printf("%zu rows -> %s (%.0f ms)\n", result.rows.size(), path.c_str(),
                        result.total_wall_ms);
        } else if (rates->parsed()) {
            hitstats::RateInputs in;
            in.xi = rt_xi;
            in.alpha = rt_alpha;
            in.dim_h = rt_dim_h;
            in.dim_u = rt_dim_u;
            in.epsilon = rt_eps;
            in.lebesgue_density = rt_density;
            if (rt_b > 0.0) in.b = rt_b;
            json out;
            if (rt_optimize) {
                const auto opt = hitstats::optimize_epsilon(in, 400);
                if (!rt_json) {
                    std::printf("epsilon* = %.12g\n", opt.epsilon);
                    print_rate_result(in.b ? "partition variant" : "first-return variant",
                                      opt.result);
                } else {
                    out = rate_result_to_json(opt.result);
                    out["epsilon_star"] = opt.epsilon;
                    std::printf("%s\n", out.dump(2).c_str());
                }
            } else {
                const auto res = in.b.has_value() ? hitstats::rate_exponent_partition(in)
                                                  : hitstats::rate_exponent(in);
                if (!rt_json) {
                    print_rate_result(in.b ? "partition variant" : "first-return variant", res);
                } else {
                    out = rate_result_to_json(res);
                    std::printf("%s\n", out.dump(2).c_str());
                }
            }
        } else if (sweep->parsed()) {
            const json doc = json::parse(read_file(sweep_config));
            if (!doc.contains("experiments") || !doc["experiments"].is_array())
                throw std::invalid_argument("sweep config: missing \"experiments\" array");
            for (const json& jexp : doc["experiments"]) {
                ExperimentConfig cfg = ExperimentConfig::from_json_text(jexp.dump());
                if (seed_opt->count() > 0) cfg.master_seed = seed;
                cfg.validate();
                const auto result = hitstats::run_experiment(cfg, workers);
                const std::string path = hitstats::write_result(result, out_dir);
                std::printf("%s: %zu rows -> %s (%.0f ms)\n", cfg.name.c_str(),
                            result.rows.size(), path.c_str(), result.total_wall_ms);
            }
        } else if (fit->parsed()) {
            const auto rows = hitstats::rows_from_csv(read_file(fit_csv));
            const auto stat = hitstats::statistic_from_name(fit_stat);
            std::size_t max_z = 0;
            for (const auto& r : rows) max_z = std::max(max_z, r.z_index);
            for (std::size_t z = 0; z <= max_z; ++z) {
                std::vector<hitstats::ResultRow> group;
                for (const auto& r : rows)
                    if (r.z_index == z) group.push_back(r);
                if (group.empty()) continue;
                try {
                    const auto f = hitstats::fit_rate(group, stat);
                    std::printf("z=%zu  %s: slope %.6g  se %.3g  (%zu radii, %zu excluded)\n", z,
                                fit_stat.c_str(), f.slope, f.se, f.used, f.excluded_nonpositive);
                } catch (const hitstats::InsufficientGrid& e) {
                    std::printf("z=%zu  %s: %s\n", z, fit_stat.c_str(), e.what());
                }
            }
        } else {  // selftest
            const auto report = hitstats::run_selftest();
            for (const auto& s : report.suites)
                std::printf("%-26s %s  %s\n", s.name.c_str(), s.passed ? "PASS" : "FAIL",
                            s.detail.c_str());
            if (!report.all_passed()) return 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
