#include "hitstats/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "hitstats/pointproc.hpp"

namespace hitstats {

namespace {

void check_common(const RateInputs& in) {
    if (!(in.xi > 1.0)) throw std::invalid_argument("rate inputs: xi must be > 1");
    if (!(in.alpha > 0.0)) throw std::invalid_argument("rate inputs: alpha must be > 0");
    if (!(in.dim_h > 0.0) || !(in.dim_u > 0.0))
        throw std::invalid_argument("rate inputs: dimensions must be > 0");
    if (!(in.epsilon > 0.0)) throw std::invalid_argument("rate inputs: epsilon must be > 0");
}

struct Branch {
    const char* name;
    double value;
};

RateResult assemble(const std::vector<ConstraintMargin>& report, bool feasible,
                    const std::vector<Branch>& branches) {
    RateResult res;
    res.constraint_report = report;
    res.feasible = feasible;
    for (const Branch& br : branches) res.branches.push_back({br.name, br.value});
    if (!feasible) return res;
    double best = branches.front().value;
    const char* name = branches.front().name;
    for (const Branch& br : branches) {
        if (br.value < best) {
            best = br.value;
            name = br.name;
        }
    }
    res.exponent_a = best;
    res.binding_term = name;
    if (!(best > 0.0)) {
        // All constraints hold iff every branch is strictly positive; a
        // non-positive minimum means epsilon sits exactly on a boundary.
        res.feasible = false;
        res.constraint_report.push_back({"positive_exponent", best, false});
    }
    return res;
}

// Core of both rate computations: `u_eff` is dim_u for the first-return
// variant and b*dim_u/(b+dim_u) for the partition variant.
RateResult rate_core(const RateInputs& in, double u_eff, double alpha_base_bound,
                     double alpha_eps_bound_corona) {
    const double D = in.dim_h;
    const double eps = in.epsilon;
    const double eps_cap = std::min(std::min(u_eff, D) / 24.0, 1.0 / (3.0 * D));
    const double shrink = 1.0 / ((1.0 - eps / D) * (1.0 - eps / D));
    const double alpha_eps_density = (1.0 / D) * shrink;
    const double alpha_eps_general = std::max(alpha_eps_density, alpha_eps_bound_corona * shrink);

    std::vector<ConstraintMargin> report;
    report.push_back({"epsilon_cap", eps_cap - eps, eps < eps_cap});
    report.push_back({"alpha_base", in.alpha - alpha_base_bound, in.alpha > alpha_base_bound});
    report.push_back(
        {"alpha_epsilon", in.alpha - alpha_eps_general, in.alpha > alpha_eps_general});

    const double xi_branch = (D - eps) * (D - eps) * (in.xi - 1.0) / D;
    const double corona_branch =
        ((1.0 + (D - eps) * (D - eps) * in.alpha / D) * u_eff - 2.0 * D - 2.0 * eps) / 2.0;
    const double eps_sq_branch = eps * eps / D - 3.0 * eps * eps * eps;
    const double cap_branch = std::min(u_eff, D) / 12.0 - 2.0 * eps;

    const bool general_ok = report[0].satisfied && report[1].satisfied && report[2].satisfied;
    RateResult general = assemble(report, general_ok,
                                  {{"xi_branch", xi_branch},
                                   {"corona_branch", corona_branch},
                                   {"epsilon_sq_branch", eps_sq_branch},
                                   {"cap_branch", cap_branch}});

    if (!in.lebesgue_density) return general;

    // Density variant: the corona ratio is bounded directly by the local
    // density, so only the milder alpha constraint applies and the corona
    // branch becomes (D-eps)^2 alpha / D - 1.
    std::vector<ConstraintMargin> dreport;
    dreport.push_back({"epsilon_cap", eps_cap - eps, eps < eps_cap});
    dreport.push_back(
        {"alpha_epsilon_density", in.alpha - alpha_eps_density, in.alpha > alpha_eps_density});
    const double corona_density = (D - eps) * (D - eps) * in.alpha / D - 1.0;
    const bool density_ok = dreport[0].satisfied && dreport[1].satisfied;
    RateResult density = assemble(dreport, density_ok,
                                  {{"xi_branch", xi_branch},
                                   {"corona_branch", corona_density},
                                   {"epsilon_sq_branch", eps_sq_branch},
                                   {"cap_branch", cap_branch}});

    // Both hypothesis sets may hold; report the better exponent and note
    // which branch set produced it.
    RateResult* chosen;
    if (general.feasible && density.feasible)
        chosen = density.exponent_a >= general.exponent_a ? &density : &general;
    else if (density.feasible)
        chosen = &density;
    else
        chosen = &general;
    chosen->constraint_report.push_back(
        {chosen == &density ? "branch_set_density" : "branch_set_general", 0.0, true});
    return *chosen;
}

}  // namespace

RateResult rate_exponent(const RateInputs& in) {
    check_common(in);
    const double base = 2.0 / in.dim_u - 1.0 / in.dim_h;
    const double corona_eps_bound =
        2.0 / in.dim_u - 1.0 / in.dim_h + 2.0 * in.epsilon / (in.dim_u * in.dim_h);
    return rate_core(in, in.dim_u, base, corona_eps_bound);
}

RateResult rate_exponent_partition(const RateInputs& in) {
    check_common(in);
    if (!in.b.has_value() || !(*in.b > 0.0))
        throw std::invalid_argument("rate_exponent_partition: b must be present and > 0");
    const double b = *in.b;
    const double u_eff = b * in.dim_u / (b + in.dim_u);
    const double factor = (b + in.dim_u) / b;
    const double base = (2.0 / in.dim_u) * factor - 1.0 / in.dim_h;
    const double corona_eps_bound =
        (2.0 / in.dim_u + 2.0 * in.epsilon / (in.dim_u * in.dim_h)) * factor - 1.0 / in.dim_h;
    return rate_core(in, u_eff, base, corona_eps_bound);
}

EpsilonOptimum optimize_epsilon(RateInputs inputs, std::size_t grid_size) {
    if (grid_size < 100) throw std::invalid_argument("optimize_epsilon: grid_size must be >= 100");
    const bool partition = inputs.b.has_value();
    double u_eff = inputs.dim_u;
    if (partition) u_eff = *inputs.b * inputs.dim_u / (*inputs.b + inputs.dim_u);
    const double eps_cap = std::min(std::min(u_eff, inputs.dim_h) / 24.0,
                                    1.0 / (3.0 * inputs.dim_h));

    EpsilonOptimum best{0.0, RateResult{}};
    const double lo = std::log(eps_cap * 1e-6);
    const double hi = std::log(eps_cap * (1.0 - 1e-9));
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(grid_size - 1);
        inputs.epsilon = std::exp(lo + f * (hi - lo));
        const RateResult r = partition ? rate_exponent_partition(inputs) : rate_exponent(inputs);
        if (r.feasible && (!best.result.feasible || r.exponent_a > best.result.exponent_a))
            best = {inputs.epsilon, r};
    }
    if (!best.result.feasible) {
        best.result.feasible = false;
        best.result.constraint_report.push_back({"no_feasible_epsilon", 0.0, false});
    }
    return best;
}

double stein_chen_bound(std::size_t n, double q) {
    if (n < 1) throw std::invalid_argument("stein_chen_bound: n must be >= 1");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("stein_chen_bound: q must be in [0,1]");
    return 4.0 * static_cast<double>(n) * q * q;
}

double binomial_poisson_tv(std::size_t n, double q) {
    if (n > 30) throw std::invalid_argument("binomial_poisson_tv: n must be <= 30");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("binomial_poisson_tv: q in [0,1]");
    const double lambda = static_cast<double>(n) * q;
    // Binomial pmf by explicit products; n <= 30 keeps everything exact in
    // double precision up to rounding.
    std::vector<double> binom(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        double coeff = 1.0;
        for (std::size_t i = 0; i < k; ++i)
            coeff = coeff * static_cast<double>(n - i) / static_cast<double>(i + 1);
        binom[k] = coeff * std::pow(q, static_cast<double>(k)) *
                   std::pow(1.0 - q, static_cast<double>(n - k));
    }
    double acc = 0.0, pois_cum = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double pk = poisson_pmf(k, lambda);
        pois_cum += pk;
        acc += std::abs(binom[k] - pk);
    }
    acc += std::max(0.0, 1.0 - pois_cum);  // Poisson mass beyond n, where the binomial is 0
    return 0.5 * acc;
}

BoundBreakdown decoupling_bound_terms(std::size_t n, std::size_t p, double mu_hat,
                                      double short_return_normalized) {
    if (p < 1 || n <= p) throw std::invalid_argument("decoupling_bound_terms: need n > p >= 1");
    BoundBreakdown bb;
    bb.n = n;
    bb.p = p;
    const double np = static_cast<double>(n - p);
    const double pd = static_cast<double>(p);
    bb.term_short_returns = 4.0 * np * mu_hat * short_return_normalized;
    bb.term_quadratic = 4.0 * pd * np * mu_hat * mu_hat;
    bb.term_boundary = 4.0 * pd * mu_hat;
    bb.total = bb.term_short_returns + bb.term_quadratic + bb.term_boundary;
    return bb;
}

BoundBreakdown assembled_tv_bound(double r, const RateInputs& in, double corona_ratio,
                                  double short_return_normalized, std::size_t n, std::size_t p) {
    if (!(r > 0.0)) throw std::invalid_argument("assembled_tv_bound: r must be > 0");
    const double D = in.dim_h;
    const double eps = in.epsilon;
    BoundBreakdown bb;
    bb.n = n;
    bb.p = p;
    bb.term_quadratic = std::pow(r, D - eps);
    bb.term_power = std::pow(r, (D - eps) * (D - eps) * (in.xi - 1.0) / D);
    bb.term_boundary = std::pow(r, eps * (D - eps) / D);
    bb.term_corona = corona_ratio;
    bb.term_corona_sq = corona_ratio * corona_ratio;
    bb.term_short_returns = short_return_normalized;
    bb.total = bb.term_quadratic + bb.term_power + bb.term_boundary + bb.term_corona +
               bb.term_corona_sq + bb.term_short_returns;
    return bb;
}

}  // namespace hitstats
