#include "hitstats/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hitstats/measure.hpp"
#include "hitstats/pointproc.hpp"
#include "hitstats/stats.hpp"

namespace hitstats {

namespace {

using nlohmann::json;

constexpr uint64_t kSeedCenters = 0xC1;
constexpr uint64_t kSeedMeasure = 0xC2;
constexpr uint64_t kSeedTrial = 0xC3;
constexpr std::size_t kCountLawMax = 50;
constexpr std::size_t kCenterStride = 997;

uint64_t string_tag(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// ---- Drivers --------------------------------------------------------------

struct DoublingDriver {
    using Stream = DoublingOrbit;
    using State = IntervalPoint;
    SystemSpec spec;
    Stream make(uint64_t seed, uint64_t burn) const { return Stream(seed, burn); }
    double metric(const State& a, const State& b) const { return dist(a, b); }
    State from_explicit(const ExplicitCenter& e) const { return {e.x}; }
    std::string repr(const State& s) const { return "x=" + fmt17(s.x); }
};

struct LsvDriver {
    using Stream = LsvOrbit;
    using State = IntervalPoint;
    SystemSpec spec;
    Stream make(uint64_t seed, uint64_t burn) const { return Stream(spec.gamma, seed, burn); }
    double metric(const State& a, const State& b) const { return dist(a, b); }
    State from_explicit(const ExplicitCenter& e) const { return {e.x}; }
    std::string repr(const State& s) const { return "x=" + fmt17(s.x); }
};

struct SmaleSolenoidDriver {
    using Stream = SmaleSolenoidOrbit;
    using State = SolenoidPoint;
    SystemSpec spec;
    Stream make(uint64_t seed, uint64_t burn) const { return Stream(spec.theta, seed, burn); }
    double metric(const State& a, const State& b) const { return dist(a, b); }
    State from_explicit(const ExplicitCenter& e) const { return {e.x, {e.re, e.im}}; }
    std::string repr(const State& s) const {
        return "x=" + fmt17(s.x) + "|re=" + fmt17(s.z.real()) + "|im=" + fmt17(s.z.imag());
    }
};

struct IntermittentSolenoidDriver {
    using Stream = IntermittentSolenoidOrbit;
    using State = SolenoidPoint;
    SystemSpec spec;
    Stream make(uint64_t seed, uint64_t burn) const {
        return Stream(spec.gamma, spec.theta, seed, burn);
    }
    double metric(const State& a, const State& b) const { return dist(a, b); }
    State from_explicit(const ExplicitCenter& e) const { return {e.x, {e.re, e.im}}; }
    std::string repr(const State& s) const {
        return "x=" + fmt17(s.x) + "|re=" + fmt17(s.z.real()) + "|im=" + fmt17(s.z.imag());
    }
};

struct HenonDriver {
    using Stream = HenonOrbit;
    using State = PlanePoint;
    SystemSpec spec;
    Stream make(uint64_t seed, uint64_t burn) const {
        return Stream(spec.henon_a, spec.henon_b, spec.trap_half_width, seed, burn);
    }
    double metric(const State& a, const State& b) const { return dist(a, b); }
    State from_explicit(const ExplicitCenter& e) const { return {e.x, e.y}; }
    std::string repr(const State& s) const { return "x=" + fmt17(s.x) + "|y=" + fmt17(s.y); }
};

struct BilliardDriver {
    using Stream = BilliardOrbit;
    using State = CollisionState;
    TableSpec table;
    Stream make(uint64_t seed, uint64_t burn) const { return Stream(table, seed, burn); }
    double metric(const State& a, const State& b) const {
        return collision_dist(a, b, table.perimeter());
    }
    State from_explicit(const ExplicitCenter& e) const { return {e.s, e.phi}; }
    std::string repr(const State& s) const { return "s=" + fmt17(s.s) + "|phi=" + fmt17(s.phi); }
};

template <class F>
auto dispatch_driver(const ExperimentConfig& cfg, F&& f) {
    if (std::holds_alternative<TableSpec>(cfg.system))
        return f(BilliardDriver{std::get<TableSpec>(cfg.system)});
    const SystemSpec& spec = std::get<SystemSpec>(cfg.system);
    switch (spec.kind) {
        case SystemKind::Doubling: return f(DoublingDriver{spec});
        case SystemKind::Lsv: return f(LsvDriver{spec});
        case SystemKind::SmaleSolenoid: return f(SmaleSolenoidDriver{spec});
        case SystemKind::IntermittentSolenoid: return f(IntermittentSolenoidDriver{spec});
        case SystemKind::Henon: return f(HenonDriver{spec});
    }
    throw std::logic_error("unknown system kind");
}

// Per-center outputs of the single measurement pass.
struct CenterBlock {
    std::string center_repr;
    std::vector<double> mu;            // per radius; 0 marks degenerate
    std::vector<double> mu_half;
    std::vector<std::vector<std::size_t>> hits;  // per radius, measurement orbit
    std::vector<double> corona_delta;
    std::vector<double> corona;        // ratio, NaN when degenerate
    double dim_hat = std::numeric_limits<double>::quiet_NaN();
    double dim_se = std::numeric_limits<double>::quiet_NaN();
    double theory_a = std::numeric_limits<double>::quiet_NaN();
    std::string theory_binding = "n/a";
    std::size_t length = 0;
    bool failed = false;
    std::string fail_reason;
};

// Deterministic worker pool: tasks indexed 0..n-1, each writing only its own
// slot, merged in index order.
void run_tasks(std::size_t n_tasks, std::size_t workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

template <class Driver>
std::vector<typename Driver::State> gather_centers(const Driver& drv, const ExperimentConfig& cfg,
                                                   uint64_t sys_tag) {
    using State = typename Driver::State;
    std::vector<State> centers;
    for (const ExplicitCenter& e : cfg.explicit_centers) centers.push_back(drv.from_explicit(e));
    if (cfg.sampled_centers > 0) {
        auto stream = drv.make(seed_chain(cfg.master_seed, {sys_tag, kSeedCenters}), cfg.burn_in);
        for (std::size_t k = 0; k < cfg.sampled_centers; ++k) {
            State s{};
            for (std::size_t i = 0; i < kCenterStride; ++i) s = stream.next();
            centers.push_back(s);
        }
    }
    return centers;
}

template <class Driver>
CenterBlock measure_center(const Driver& drv, const ExperimentConfig& cfg, uint64_t sys_tag,
                           const typename Driver::State& center, std::size_t z_idx) {
    CenterBlock block;
    block.center_repr = drv.repr(center);
    const std::vector<double> radii = cfg.radii.radii();
    const std::size_t R = radii.size();

    std::vector<double> thresholds = radii;
    std::vector<std::size_t> record(R);
    block.corona_delta.resize(R);
    for (std::size_t k = 0; k < R; ++k) {
        record[k] = k;
        const double delta =
            std::min(std::pow(radii[k], cfg.corona_delta_power), 0.5 * radii[k]);
        block.corona_delta[k] = delta;
        thresholds.push_back(radii[k] - delta);
        thresholds.push_back(radii[k] + delta);
    }

    auto stream = drv.make(seed_chain(cfg.master_seed, {sys_tag, kSeedMeasure, z_idx}), cfg.burn_in);
    const auto metric = [&](const typename Driver::State& a, const typename Driver::State& b) {
        return drv.metric(a, b);
    };
    MeasurePass pass = measure_pass(std::move(stream), cfg.orbit_length, center, metric,
                                    std::move(thresholds), std::move(record));
    block.length = pass.length;

    block.mu.resize(R);
    block.mu_half.resize(R);
    block.corona.assign(R, std::numeric_limits<double>::quiet_NaN());
    block.hits.resize(R);
    std::vector<double> fit_r;
    std::vector<MeasureEstimate> fit_est;
    for (std::size_t k = 0; k < R; ++k) {
        const std::size_t count = pass.counts[k];
        block.mu[k] = static_cast<double>(count) / static_cast<double>(pass.length);
        block.mu_half[k] = count == 0 ? 0.0 : binomial_half_width(block.mu[k], pass.length);
        block.hits[k] = std::move(pass.hit_idx[k]);
        if (count > 0) {
            const std::size_t lo = pass.counts[R + 2 * k];
            const std::size_t hi = pass.counts[R + 2 * k + 1];
            block.corona[k] = static_cast<double>(hi - lo) / static_cast<double>(count);
            fit_r.push_back(radii[k]);
            fit_est.push_back(MeasureEstimate{block.mu[k], block.mu_half[k], pass.length});
        }
    }
    if (fit_r.size() >= 4) {
        const SlopeEstimate d = local_dimension(fit_r, fit_est);
        block.dim_hat = d.slope;
        block.dim_se = d.se;
    }

    if (auto inputs = analytic_rate_inputs(cfg, block.dim_hat)) {
        const EpsilonOptimum opt = optimize_epsilon(*inputs, 400);
        if (opt.result.feasible) {
            block.theory_a = opt.result.exponent_a;
            block.theory_binding = opt.result.binding_term;
        } else {
            block.theory_binding = "infeasible";
        }
    }
    return block;
}

template <class Driver>
ResultRow run_cell(const Driver& drv, const ExperimentConfig& cfg, uint64_t sys_tag,
                   const typename Driver::State& center, const CenterBlock& block,
                   std::size_t z_idx, std::size_t r_idx) {
    const double t_start = now_ms();
    const std::vector<double> radii = cfg.radii.radii();
    const double r = radii[r_idx];
    const double T = cfg.horizon;

    ResultRow row;
    row.system = cfg.system_id();
    row.z_index = z_idx;
    row.r_index = r_idx;
    row.center = block.center_repr;
    row.r = r;
    row.mu_hat = block.mu[r_idx];
    row.mu_half_width = block.mu_half[r_idx];
    row.sample_count = block.length;
    row.dim_hat = block.dim_hat;
    row.dim_se = block.dim_se;
    row.corona_delta = block.corona_delta[r_idx];
    row.corona_ratio_stat = block.corona[r_idx];
    row.theory_a = block.theory_a;
    row.theory_binding = block.theory_binding;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (row.mu_hat <= 0.0) {
        row.flags.push_back("degenerate");
        row.tv_counts_stat = row.fidi_tv_stat = row.fidi_se = row.ks_exp = nan;
        row.short_return_norm = row.bound_total = row.censored_fraction = nan;
        row.wall_time_ms = now_ms() - t_start;
        return row;
    }

    // Short returns on the measurement orbit, window p per the default policy.
    const double dim_for_p = (std::isfinite(block.dim_hat) && block.dim_hat > 0.0)
                                 ? block.dim_hat
                                 : 1.0;
    double eps_for_p = cfg.epsilon;
    if (eps_for_p >= dim_for_p) {
        eps_for_p = 0.5 * dim_for_p;
        row.flags.push_back("epsilon_clamped_for_p");
    }
    row.p_short = default_short_return_window(T, row.mu_hat, dim_for_p, eps_for_p);
    try {
        row.short_return_norm =
            short_return_fraction_from_hits(block.hits[r_idx], row.p_short, block.length);
    } catch (const DegenerateTarget&) {
        row.short_return_norm = nan;
        row.flags.push_back("short_returns_degenerate");
    }

    // Trials: independent window orbits, one point pattern per trial.
    const std::size_t n = static_cast<std::size_t>(std::floor(T / row.mu_hat));
    row.n_window = n;
    if (n < 1) {
        row.flags.push_back("window_too_short");
        row.tv_counts_stat = row.fidi_tv_stat = row.fidi_se = row.ks_exp = nan;
        row.bound_total = row.censored_fraction = nan;
        row.wall_time_ms = now_ms() - t_start;
        return row;
    }
    std::vector<PointPattern> patterns;
    patterns.reserve(cfg.trials);
    std::vector<double> first_hits(cfg.trials, kCensored);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        auto stream =
            drv.make(seed_chain(cfg.master_seed, {sys_tag, kSeedTrial, z_idx, r_idx, t}),
                     cfg.burn_in);
        PointPattern pat;
        pat.horizon = T;
        for (std::size_t i = 0; i <= n; ++i) {
            const auto state = stream.next();
            if (drv.metric(state, center) < r) {
                const double time = static_cast<double>(i) * row.mu_hat;
                pat.times.push_back(time);
                if (first_hits[t] == kCensored) first_hits[t] = time;
            }
        }
        patterns.push_back(std::move(pat));
    }

    const CountLaw empirical = empirical_count_law(patterns, kCountLawMax);
    const CountLaw reference = poisson_count_law(T, kCountLawMax);
    row.tv_counts_stat = tv_counts(empirical, reference);

    try {
        const auto partition = equal_partition(T, cfg.partition_m);
        const FidiTv f = fidi_tv(patterns, partition);
        row.fidi_tv_stat = f.tv;
        row.fidi_se = f.se;
    } catch (const InsufficientSamples&) {
        row.fidi_tv_stat = row.fidi_se = nan;
        row.flags.push_back("fidi_insufficient_samples");
    }

    std::size_t censored = 0;
    for (double h : first_hits)
        if (h == kCensored) ++censored;
    row.censored_fraction = static_cast<double>(censored) / static_cast<double>(cfg.trials);
    try {
        row.ks_exp = ks_exponential(first_hits);
    } catch (const AllCensored&) {
        row.ks_exp = nan;
        row.flags.push_back("all_censored");
    }

    RateInputs bound_inputs;
    if (auto inputs = analytic_rate_inputs(cfg, block.dim_hat)) bound_inputs = *inputs;
    bound_inputs.epsilon = cfg.epsilon;
    if (std::isfinite(block.dim_hat) && block.dim_hat > 0.0) bound_inputs.dim_h = block.dim_hat;
    if (!(bound_inputs.epsilon < bound_inputs.dim_h)) bound_inputs.epsilon = 0.5 * bound_inputs.dim_h;
    const double corona_for_bound = std::isfinite(row.corona_ratio_stat) ? row.corona_ratio_stat : 0.0;
    const double short_for_bound = std::isfinite(row.short_return_norm) ? row.short_return_norm : 0.0;
    row.bound_total =
        assembled_tv_bound(r, bound_inputs, corona_for_bound, short_for_bound, n, row.p_short)
            .total;

    row.wall_time_ms = now_ms() - t_start;
    return row;
}

template <class Driver>
std::vector<ResultRow> run_typed(const Driver& drv, const ExperimentConfig& cfg,
                                 std::size_t workers) {
    const uint64_t sys_tag = string_tag(cfg.system_id());
    const auto centers = gather_centers(drv, cfg, sys_tag);
    const std::size_t R = cfg.radii.radii().size();
    const std::size_t Z = centers.size();

    std::vector<CenterBlock> blocks(Z);
    run_tasks(Z, workers, [&](std::size_t z) {
        try {
            blocks[z] = measure_center(drv, cfg, sys_tag, centers[z], z);
        } catch (const std::exception& e) {
            blocks[z].failed = true;
            blocks[z].fail_reason = e.what();
            blocks[z].center_repr = drv.repr(centers[z]);
        }
    });

    std::vector<ResultRow> rows(Z * R);
    run_tasks(Z * R, workers, [&](std::size_t task) {
        const std::size_t z = task / R;
        const std::size_t r = task % R;
        const std::vector<double> radii = cfg.radii.radii();
        ResultRow& row = rows[task];
        if (blocks[z].failed) {
            row.system = cfg.system_id();
            row.z_index = z;
            row.r_index = r;
            row.center = blocks[z].center_repr;
            row.r = radii[r];
            row.flags.push_back("center_failed:" + blocks[z].fail_reason);
            return;
        }
        try {
            row = run_cell(drv, cfg, sys_tag, centers[z], blocks[z], z, r);
        } catch (const std::exception& e) {
            row.system = cfg.system_id();
            row.z_index = z;
            row.r_index = r;
            row.center = blocks[z].center_repr;
            row.r = radii[r];
            row.flags.push_back(std::string("cell_failed:") + e.what());
        }
    });
    return rows;
}

}  // namespace

std::vector<double> RadiusGrid::radii() const {
    std::vector<double> out;
    double r = r_max;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(r);
        r *= ratio;
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (std::holds_alternative<SystemSpec>(system))
        std::get<SystemSpec>(system).validate();
    else
        std::get<TableSpec>(system).validate();
    if (!(horizon > 0.0) || horizon > 5.0)
        throw std::invalid_argument("config: horizon must be in (0, 5]");
    if (!(radii.r_max > 0.0) || !(radii.ratio > 0.0) || radii.ratio >= 1.0 || radii.count < 1)
        throw std::invalid_argument("config: radii must be a strictly decreasing geometric grid");
    if (trials < 100) throw std::invalid_argument("config: trials must be >= 100");
    if (orbit_length < 10000)
        throw std::invalid_argument("config: orbit_length must be >= 1e4");
    if (partition_m < 1 || partition_m > 4)
        throw std::invalid_argument("config: partition_m must be in 1..4");
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be > 0");
    if (!(corona_delta_power > 1.0))
        throw std::invalid_argument("config: corona_delta_power must be > 1");
    if (sampled_centers + explicit_centers.size() == 0)
        throw std::invalid_argument("config: need at least one center");
}

std::string ExperimentConfig::system_id() const {
    return std::holds_alternative<SystemSpec>(system) ? std::get<SystemSpec>(system).id()
                                                      : std::get<TableSpec>(system).id();
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers) {
    config.validate();
    const double t0 = now_ms();
    ExperimentResult result;
    result.config = config;
    result.rows = dispatch_driver(
        config, [&](const auto& drv) { return run_typed(drv, config, std::max<std::size_t>(workers, 1)); });
    result.total_wall_ms = now_ms() - t0;
    return result;
}

bool ResultRow::degenerate() const {
    for (const auto& f : flags)
        if (f == "degenerate" || f.rfind("center_failed", 0) == 0 || f.rfind("cell_failed", 0) == 0)
            return true;
    return false;
}

namespace {

std::string join_flags(const std::vector<std::string>& flags) {
    if (flags.empty()) return "ok";
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) out += '|';
        out += flags[i];
    }
    // Failure flags may embed exception text; keep the CSV single-celled.
    for (char& c : out)
        if (c == ',' || c == '\n') c = ';';
    return out;
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out =
        "system,z_index,r_index,center,r,mu_hat,mu_half_width,sample_count,dim_hat,dim_se,"
        "n_window,p_short,tv_counts,fidi_tv,fidi_se,ks_exponential,censored_fraction,"
        "short_return_norm,corona_delta,corona_ratio,bound_total,theory_a,theory_binding,flags\n";
    for (const ResultRow& r : rows) {
        out += r.system + ',' + std::to_string(r.z_index) + ',' + std::to_string(r.r_index) + ',' +
               r.center + ',' + fmt17(r.r) + ',' + fmt17(r.mu_hat) + ',' +
               fmt17(r.mu_half_width) + ',' + std::to_string(r.sample_count) + ',' +
               fmt17(r.dim_hat) + ',' + fmt17(r.dim_se) + ',' + std::to_string(r.n_window) + ',' +
               std::to_string(r.p_short) + ',' + fmt17(r.tv_counts_stat) + ',' +
               fmt17(r.fidi_tv_stat) + ',' + fmt17(r.fidi_se) + ',' + fmt17(r.ks_exp) + ',' +
               fmt17(r.censored_fraction) + ',' + fmt17(r.short_return_norm) + ',' +
               fmt17(r.corona_delta) + ',' + fmt17(r.corona_ratio_stat) + ',' +
               fmt17(r.bound_total) + ',' + fmt17(r.theory_a) + ',' + r.theory_binding + ',' +
               join_flags(r.flags) + '\n';
    }
    return out;
}

std::vector<ResultRow> rows_from_csv(const std::string& csv) {
    std::vector<ResultRow> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 24) throw std::invalid_argument("rows_from_csv: malformed line");
        ResultRow r;
        r.system = f[0];
        r.z_index = std::stoull(f[1]);
        r.r_index = std::stoull(f[2]);
        r.center = f[3];
        r.r = std::stod(f[4]);
        r.mu_hat = std::stod(f[5]);
        r.mu_half_width = std::stod(f[6]);
        r.sample_count = std::stoull(f[7]);
        r.dim_hat = std::stod(f[8]);
        r.dim_se = std::stod(f[9]);
        r.n_window = std::stoull(f[10]);
        r.p_short = std::stoull(f[11]);
        r.tv_counts_stat = std::stod(f[12]);
        r.fidi_tv_stat = std::stod(f[13]);
        r.fidi_se = std::stod(f[14]);
        r.ks_exp = std::stod(f[15]);
        r.censored_fraction = std::stod(f[16]);
        r.short_return_norm = std::stod(f[17]);
        r.corona_delta = std::stod(f[18]);
        r.corona_ratio_stat = std::stod(f[19]);
        r.bound_total = std::stod(f[20]);
        r.theory_a = std::stod(f[21]);
        r.theory_binding = f[22];
        if (f[23] != "ok") {
            std::string flag;
            for (char c : f[23]) {
                if (c == '|') {
                    r.flags.push_back(flag);
                    flag.clear();
                } else {
                    flag += c;
                }
            }
            r.flags.push_back(flag);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- JSON config ----------------------------------------------------------

namespace {

json system_to_json(const std::variant<SystemSpec, TableSpec>& system) {
    json j;
    if (std::holds_alternative<SystemSpec>(system)) {
        const SystemSpec& s = std::get<SystemSpec>(system);
        switch (s.kind) {
            case SystemKind::Doubling: j["kind"] = "doubling"; break;
            case SystemKind::Lsv: j["kind"] = "lsv"; break;
            case SystemKind::IntermittentSolenoid: j["kind"] = "intermittent_solenoid"; break;
            case SystemKind::SmaleSolenoid: j["kind"] = "smale_solenoid"; break;
            case SystemKind::Henon: j["kind"] = "henon"; break;
        }
        j["gamma"] = s.gamma;
        j["theta"] = s.theta;
        j["a"] = s.henon_a;
        j["b"] = s.henon_b;
        j["trap_half_width"] = s.trap_half_width;
    } else {
        const TableSpec& t = std::get<TableSpec>(system);
        if (t.kind == TableSpec::Kind::Stadium) {
            j["kind"] = "stadium";
            j["radius"] = t.semicircle_radius;
            j["flat_length"] = t.flat_length;
        } else {
            j["kind"] = "lorentz";
            json disks = json::array();
            for (const Disk& d : t.scatterers)
                disks.push_back({{"cx", d.cx}, {"cy", d.cy}, {"rho", d.rho}});
            j["scatterers"] = disks;
        }
    }
    return j;
}

std::variant<SystemSpec, TableSpec> system_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "doubling") return SystemSpec::doubling();
    if (kind == "lsv") return SystemSpec::lsv(j.value("gamma", 0.5));
    if (kind == "intermittent_solenoid")
        return SystemSpec::intermittent_solenoid(j.value("gamma", 0.5), j.value("theta", 0.1));
    if (kind == "smale_solenoid") return SystemSpec::smale_solenoid(j.value("theta", 0.1));
    if (kind == "henon") {
        SystemSpec s = SystemSpec::henon(j.value("a", 1.4), j.value("b", 0.3));
        s.trap_half_width = j.value("trap_half_width", 3.0);
        return s;
    }
    if (kind == "stadium")
        return TableSpec::stadium(j.value("radius", 1.0), j.value("flat_length", 2.0));
    if (kind == "lorentz_single") return TableSpec::lorentz_single();
    if (kind == "lorentz_two_disk") return TableSpec::lorentz_two_disk();
    if (kind == "lorentz") {
        TableSpec t;
        t.kind = TableSpec::Kind::LorentzGas;
        for (const json& d : j.at("scatterers"))
            t.scatterers.push_back({d.at("cx").get<double>(), d.at("cy").get<double>(),
                                    d.at("rho").get<double>()});
        return t;
    }
    throw std::invalid_argument("config: unknown system kind '" + kind + "'");
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["system"] = system_to_json(c.system);
    j["horizon"] = c.horizon;
    j["radii"] = {{"r_max", c.radii.r_max}, {"ratio", c.radii.ratio}, {"count", c.radii.count}};
    json centers;
    centers["count"] = c.sampled_centers;
    json expl = json::array();
    for (const ExplicitCenter& e : c.explicit_centers)
        expl.push_back({{"x", e.x}, {"y", e.y}, {"re", e.re}, {"im", e.im}, {"s", e.s},
                        {"phi", e.phi}});
    centers["explicit"] = expl;
    j["centers"] = centers;
    j["trials"] = c.trials;
    j["orbit_length"] = c.orbit_length;
    j["burn_in"] = c.burn_in;
    j["epsilon"] = c.epsilon;
    j["partition_m"] = c.partition_m;
    j["master_seed"] = c.master_seed;
    j["corona_delta_power"] = c.corona_delta_power;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.name = j.value("name", std::string("experiment"));
    c.system = system_from_json(j.at("system"));
    c.horizon = j.value("horizon", 2.0);
    if (j.contains("radii")) {
        const json& r = j.at("radii");
        c.radii.r_max = r.value("r_max", 0.03125);
        c.radii.ratio = r.value("ratio", 0.5);
        c.radii.count = r.value("count", std::size_t{4});
    }
    if (j.contains("centers")) {
        const json& z = j.at("centers");
        c.sampled_centers = z.value("count", std::size_t{1});
        if (z.contains("explicit")) {
            for (const json& e : z.at("explicit")) {
                ExplicitCenter ec;
                ec.x = e.value("x", 0.0);
                ec.y = e.value("y", 0.0);
                ec.re = e.value("re", 0.0);
                ec.im = e.value("im", 0.0);
                ec.s = e.value("s", 0.0);
                ec.phi = e.value("phi", 0.0);
                c.explicit_centers.push_back(ec);
            }
        }
    }
    c.trials = j.value("trials", std::size_t{100});
    c.orbit_length = j.value("orbit_length", std::size_t{1000000});
    c.burn_in = j.value("burn_in", std::size_t{100000});
    c.epsilon = j.value("epsilon", 0.05);
    c.partition_m = j.value("partition_m", std::size_t{2});
    c.master_seed = j.value("master_seed", uint64_t{1});
    c.corona_delta_power = j.value("corona_delta_power", 1.5);
    return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    return config_from_json(json::parse(text));
}

std::string ExperimentConfig::to_json_text() const { return config_to_json(*this).dump(2); }

std::string write_result(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string csv = rows_to_csv(result.rows);
    const std::string csv_path = (fs::path(out_dir) / (result.config.name + ".csv")).string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        out << csv;
    }
    json sidecar;
    sidecar["config"] = config_to_json(result.config);
    sidecar["csv_sha1"] = git_blob_sha1(csv);
    sidecar["rows"] = result.rows.size();
    json walls = json::array();
    for (const ResultRow& r : result.rows) walls.push_back(r.wall_time_ms);
    sidecar["row_wall_ms"] = walls;
    sidecar["total_wall_ms"] = result.total_wall_ms;
    {
        std::ofstream out((fs::path(out_dir) / (result.config.name + ".json")).string(),
                          std::ios::binary);
        out << sidecar.dump(2) << '\n';
    }
    return csv_path;
}

Statistic statistic_from_name(const std::string& name) {
    if (name == "tv_counts") return Statistic::TvCounts;
    if (name == "fidi_tv") return Statistic::FidiTv;
    if (name == "ks_exponential") return Statistic::KsExponential;
    if (name == "short_return_norm") return Statistic::ShortReturns;
    if (name == "corona_ratio") return Statistic::CoronaRatio;
    if (name == "bound_total") return Statistic::BoundTotal;
    throw std::invalid_argument("unknown statistic '" + name + "'");
}

namespace {

double statistic_value(const ResultRow& row, Statistic stat) {
    switch (stat) {
        case Statistic::TvCounts: return row.tv_counts_stat;
        case Statistic::FidiTv: return row.fidi_tv_stat;
        case Statistic::KsExponential: return row.ks_exp;
        case Statistic::ShortReturns: return row.short_return_norm;
        case Statistic::CoronaRatio: return row.corona_ratio_stat;
        case Statistic::BoundTotal: return row.bound_total;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

RateFit fit_rate(const std::vector<ResultRow>& rows, Statistic stat) {
    std::vector<double> lx, ly;
    RateFit fit;
    for (const ResultRow& row : rows) {
        if (row.degenerate()) continue;
        const double v = statistic_value(row, stat);
        if (!std::isfinite(v) || v <= 0.0) {
            ++fit.excluded_nonpositive;
            continue;
        }
        lx.push_back(std::log(row.r));
        ly.push_back(std::log(v));
    }
    if (lx.size() < 4) throw InsufficientGrid("fit_rate: need >= 4 radii with positive statistic");
    const LinearFit lf = linear_fit(lx, ly);
    fit.slope = lf.slope;
    fit.se = lf.slope_se;
    fit.used = lx.size();
    return fit;
}

std::optional<RateInputs> analytic_rate_inputs(const ExperimentConfig& config, double dim_hat) {
    // 1e6 stands in for "arbitrarily large" (exponential contraction/decay);
    // it never binds the minimum.
    constexpr double kLarge = 1e6;
    RateInputs in;
    in.epsilon = config.epsilon;
    if (std::holds_alternative<TableSpec>(config.system)) {
        const TableSpec& t = std::get<TableSpec>(config.system);
        in.dim_h = 2.0;
        in.dim_u = 1.0;
        in.lebesgue_density = true;
        if (t.kind == TableSpec::Kind::LorentzGas) {
            in.xi = kLarge;
            in.alpha = kLarge;
            in.b = 1.0;
        } else {
            in.xi = kLarge;
            in.alpha = 1.0;  // polynomial contraction of the stadium
            in.b = 0.5;
        }
        return in;
    }
    const SystemSpec& s = std::get<SystemSpec>(config.system);
    const double measured = (std::isfinite(dim_hat) && dim_hat > 0.0) ? dim_hat : 1.0;
    switch (s.kind) {
        case SystemKind::Doubling:
            in.xi = kLarge;
            in.alpha = kLarge;
            in.dim_h = 1.0;
            in.dim_u = 1.0;
            in.lebesgue_density = true;
            return in;
        case SystemKind::Lsv:
            in.xi = 1.0 / s.gamma;
            in.alpha = 1.0 + 1.0 / s.gamma;
            in.dim_h = 1.0;
            in.dim_u = 1.0;
            return in;
        case SystemKind::IntermittentSolenoid:
            in.xi = 1.0 / s.gamma;
            in.alpha = 1.0 + 1.0 / s.gamma;
            in.dim_h = measured;
            in.dim_u = 1.0;
            return in;
        case SystemKind::SmaleSolenoid:
            in.xi = kLarge;
            in.alpha = kLarge;
            in.dim_h = 1.0 + std::log(2.0) / std::log(1.0 / s.theta);
            in.dim_u = 1.0;
            return in;
        case SystemKind::Henon:
            return std::nullopt;  // no analytic return-tail exponent available
    }
    return std::nullopt;
}

bool SelftestReport::all_passed() const {
    for (const auto& s : suites)
        if (!s.passed) return false;
    return true;
}

SelftestReport run_selftest(double rate_fault) {
    SelftestReport report;

    {  // Stein-Chen domination by exact enumeration.
        bool ok = true;
        std::string detail;
        for (std::size_t n = 1; n <= 30 && ok; ++n) {
            for (int qi = 1; qi <= 50; ++qi) {
                const double q = 0.01 * qi;
                if (binomial_poisson_tv(n, q) > stein_chen_bound(n, q) + 1e-12) {
                    ok = false;
                    detail = "violated at n=" + std::to_string(n) + " q=" + fmt17(q);
                    break;
                }
            }
        }
        report.suites.push_back({"stein_chen_domination", ok, ok ? "1500 (n,q) pairs" : detail});
    }

    {  // TV metric axioms on seeded random count laws.
        Xoshiro256 rng(20240917);
        auto random_law = [&] {
            CountLaw law;
            law.probabilities.resize(8);
            double total = 0.0;
            for (double& p : law.probabilities) {
                p = rng.uniform();
                total += p;
            }
            const double tail = rng.uniform() * 0.1;
            total += tail;
            for (double& p : law.probabilities) p /= total;
            law.tail_mass = tail / total;
            return law;
        };
        bool ok = true;
        std::string detail;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            const CountLaw a = random_law(), b = random_law(), c = random_law();
            const double dab = tv_counts(a, b);
            if (tv_counts(a, a) > 1e-12 || std::abs(dab - tv_counts(b, a)) > 1e-12 ||
                dab > tv_counts(a, c) + tv_counts(c, b) + 1e-12 || dab < 0.0 || dab > 1.0) {
                ok = false;
                detail = "axiom violated on random triple " + std::to_string(trial);
            }
        }
        report.suites.push_back({"tv_metric_axioms", ok, ok ? "200 random triples" : detail});
    }

    {  // Rate formulas against independently computed values.
        RateInputs in;
        in.xi = 2.0;
        in.alpha = 3.0;
        in.dim_h = 2.0;
        in.dim_u = 1.0;
        in.epsilon = 0.04;
        const RateResult r1 = rate_exponent(in);
        // Branch values worked out by hand: 1.9208, 1.3412, 0.000608, 1/12-0.08.
        const double expect = 0.000608 + rate_fault;
        bool ok = r1.feasible && std::abs(r1.exponent_a - expect) <= 1e-12 &&
                  r1.binding_term == "epsilon_sq_branch";
        std::string detail = "a=" + fmt17(r1.exponent_a);
        RateInputs in2 = in;
        in2.b = 1e9;
        const RateResult r2 = rate_exponent_partition(in2);
        if (!(r2.feasible &&
              std::abs(r2.exponent_a - r1.exponent_a) <= 1e-6 * std::abs(r1.exponent_a)))
            ok = false;
        report.suites.push_back({"rate_formula_oracles", ok, detail});
    }

    {  // Billiard reversibility plus the circular-table closed form.
        bool ok = true;
        std::string detail;
        for (const TableSpec& table : {TableSpec::stadium(1.0, 2.0), TableSpec::lorentz_single()}) {
            BilliardOrbit orbit(table, 71, 50);
            CollisionState prev = orbit.next();
            for (int i = 0; i < 100 && ok; ++i) {
                const CollisionState cur = billiard_step(prev, table);
                const CollisionState back = billiard_step(reversed(cur), table);
                const double err = collision_dist(back, reversed(prev), table.perimeter());
                if (err > 1e-6) {
                    ok = false;
                    detail = table.id() + " reversal error " + fmt17(err);
                }
                prev = cur;
            }
        }
        const TableSpec circle = TableSpec::stadium(1.0, 0.0);
        for (int k = 1; k <= 20 && ok; ++k) {
            const double phi = -1.4 + 2.8 * k / 21.0;
            const CollisionState from{1.0, phi};
            const CollisionState to = billiard_step(from, circle);
            const double expected =
                std::fmod(from.s + (std::numbers::pi - 2.0 * phi) * 1.0, circle.perimeter());
            if (std::abs(to.phi - phi) > 1e-12 ||
                circle_dist_period(to.s, expected, circle.perimeter()) > 1e-12) {
                ok = false;
                detail = "circular closed form failed at phi=" + fmt17(phi);
            }
        }
        report.suites.push_back({"billiard_reversibility", ok, ok ? "100 collisions per table" : detail});
    }

    return report;
}

}  // namespace hitstats
