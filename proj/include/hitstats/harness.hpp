#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hitstats/billiards.hpp"
#include "hitstats/bounds.hpp"
#include "hitstats/systems.hpp"

// Experiment orchestration: declarative configs, seeded deterministic
// parallel sweeps over (system, center, radius), CSV/JSON persistence, rate
// fitting and the built-in selftest.

namespace hitstats {

struct RadiusGrid {
    double r_max = 0.03125;
    double ratio = 0.5;   // in (0,1); radii strictly decreasing
    std::size_t count = 4;

    std::vector<double> radii() const;
};

// Explicit center, interpreted per phase space; unused coordinates ignored.
struct ExplicitCenter {
    double x = 0.0;
    double y = 0.0;
    double re = 0.0;
    double im = 0.0;
    double s = 0.0;
    double phi = 0.0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::variant<SystemSpec, TableSpec> system = SystemSpec::doubling();
    double horizon = 2.0;  // T, <= 5
    RadiusGrid radii;
    std::size_t sampled_centers = 1;
    std::vector<ExplicitCenter> explicit_centers;
    std::size_t trials = 100;
    std::size_t orbit_length = 1000000;  // measurement orbit
    std::size_t burn_in = 100000;
    double epsilon = 0.05;
    std::size_t partition_m = 2;
    uint64_t master_seed = 1;
    double corona_delta_power = 1.5;  // delta = r^power, clamped below r/2

    void validate() const;  // throws std::invalid_argument
    std::string system_id() const;

    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct ResultRow {
    std::string system;
    std::size_t z_index = 0;
    std::size_t r_index = 0;
    std::string center;      // compact coordinate string, CSV-safe
    double r = 0.0;
    double mu_hat = 0.0;
    double mu_half_width = 0.0;
    std::size_t sample_count = 0;
    double dim_hat = 0.0;
    double dim_se = 0.0;
    std::size_t n_window = 0;
    std::size_t p_short = 0;
    double tv_counts_stat = 0.0;
    double fidi_tv_stat = 0.0;
    double fidi_se = 0.0;
    double ks_exp = 0.0;
    double censored_fraction = 0.0;
    double short_return_norm = 0.0;
    double corona_delta = 0.0;
    double corona_ratio_stat = 0.0;
    double bound_total = 0.0;
    double theory_a = 0.0;           // NaN when unavailable/infeasible
    std::string theory_binding;      // branch name, "infeasible" or "n/a"
    std::vector<std::string> flags;  // "degenerate", "all_censored", ...
    double wall_time_ms = 0.0;       // persisted in the sidecar, not the CSV

    bool degenerate() const;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ResultRow> rows;
    double total_wall_ms = 0.0;
};

// Deterministic given the config; cells run in parallel over `workers`
// threads and merge in (z index, r index) order. Degenerate cells yield
// flagged rows, never abort the sweep.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers = 1);

// Fixed column order; floats with 17 significant digits.
std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& csv);

// Writes <name>.csv and a <name>.json sidecar (config, git-style content
// hash of the CSV, per-row wall times). Returns the csv path.
std::string write_result(const ExperimentResult& result, const std::string& out_dir);

enum class Statistic { TvCounts, FidiTv, KsExponential, ShortReturns, CoronaRatio, BoundTotal };

Statistic statistic_from_name(const std::string& name);

struct RateFit {
    double slope = 0.0;  // fitted decay exponent of the statistic in r
    double se = 0.0;
    std::size_t used = 0;
    std::size_t excluded_nonpositive = 0;
};

// Least-squares slope of log(statistic) against log r over one center's
// rows. Rows with non-positive statistic are excluded and counted.
RateFit fit_rate(const std::vector<ResultRow>& rows_for_one_center, Statistic stat);

// Analytic rate-theorem inputs for the configured system, when the theory
// pins them; dim_hat substitutes for the measured local dimension where no
// analytic value exists. nullopt for systems without analytic inputs.
std::optional<RateInputs> analytic_rate_inputs(const ExperimentConfig& config, double dim_hat);

struct SelftestSuite {
    std::string name;
    bool passed;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestSuite> suites;
    bool all_passed() const;
};

// Exact-arithmetic self checks: Stein-Chen domination, TV metric axioms,
// rate-formula oracle values, billiard reversibility. `rate_fault` shifts
// the rate-formula comparison and exists for fault-injection tests.
SelftestReport run_selftest(double rate_fault = 0.0);

}  // namespace hitstats
